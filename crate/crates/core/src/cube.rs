//! Spectral cubes and the wavelength grid they are sampled on.
//!
//! Samples are stored band-sequential: all of band 0 in row-major order, then
//! band 1, and so on. Per-band kernels therefore read contiguous memory.

use crate::error::{Error, Result};

/// Default geometry of a full-size capture. Exposed, never enforced.
pub const DEFAULT_HEIGHT: usize = 482;
pub const DEFAULT_WIDTH: usize = 512;

/// Uniformly spaced band centres in nanometres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthGrid {
    pub start_nm: f64,
    pub step_nm: f64,
    pub bands: usize,
}

impl Default for WavelengthGrid {
    /// 31 bands, 400 nm to 700 nm in 10 nm steps.
    fn default() -> Self {
        WavelengthGrid {
            start_nm: 400.0,
            step_nm: 10.0,
            bands: 31,
        }
    }
}

impl WavelengthGrid {
    pub fn new(start_nm: f64, step_nm: f64, bands: usize) -> Result<Self> {
        if !start_nm.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        if !(step_nm.is_finite() && step_nm > 0.0) {
            return Err(Error::invalid(format!(
                "grid step must be positive, got {step_nm}"
            )));
        }
        if bands == 0 {
            return Err(Error::invalid("grid needs at least one band"));
        }
        Ok(WavelengthGrid {
            start_nm,
            step_nm,
            bands,
        })
    }

    pub fn wavelength(&self, band: usize) -> f64 {
        self.start_nm + band as f64 * self.step_nm
    }

    pub fn end_nm(&self) -> f64 {
        self.wavelength(self.bands - 1)
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.bands).map(|b| self.wavelength(b))
    }
}

/// An H×W×B radiance cube.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    height: usize,
    width: usize,
    grid: WavelengthGrid,
    data: Vec<f64>,
}

impl HsiCube {
    /// Wraps band-sequential samples. Only the shape is checked here; sample
    /// validity is reported by [`HsiCube::validate`], because reconstructions
    /// such as the pseudoinverse estimate legitimately contain negatives.
    pub fn new(height: usize, width: usize, grid: WavelengthGrid, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "cube dimensions must be nonzero, got {height}x{width}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(grid.bands))
            .ok_or_else(|| Error::invalid("cube dimensions overflow"))?;
        if data.len() != expected {
            return Err(Error::invalid(format!(
                "cube data length {} does not match {height}x{width}x{}",
                data.len(),
                grid.bands
            )));
        }
        Ok(HsiCube {
            height,
            width,
            grid,
            data,
        })
    }

    /// Like [`HsiCube::new`] but additionally rejects NaN, infinite and
    /// negative samples.
    pub fn new_radiance(
        height: usize,
        width: usize,
        grid: WavelengthGrid,
        data: Vec<f64>,
    ) -> Result<Self> {
        let cube = Self::new(height, width, grid, data)?;
        let report = cube.validate();
        if let Some(first) = report.issues.first() {
            return Err(Error::invalid(format!(
                "{} invalid sample(s), first: {first}",
                report.issues.len()
            )));
        }
        Ok(cube)
    }

    pub fn filled(height: usize, width: usize, grid: WavelengthGrid, value: f64) -> Result<Self> {
        Self::new(height, width, grid, vec![value; height * width * grid.bands])
    }

    /// Builds a cube from a per-pixel spectrum function.
    pub fn from_fn(
        height: usize,
        width: usize,
        grid: WavelengthGrid,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * grid.bands);
        for b in 0..grid.bands {
            for r in 0..height {
                for c in 0..width {
                    data.push(f(r, c, b));
                }
            }
        }
        Self::new(height, width, grid, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.grid.bands
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, band: usize) -> usize {
        band * self.height * self.width + row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[self.index(row, col, band)]
    }

    pub fn band(&self, band: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[band * n..(band + 1) * n]
    }

    /// Spectrum of the pixel at linear index `pixel` (row-major).
    pub fn spectrum(&self, pixel: usize) -> Vec<f64> {
        let n = self.pixels();
        (0..self.bands()).map(|b| self.data[b * n + pixel]).collect()
    }

    pub fn spectrum_at(&self, row: usize, col: usize) -> Vec<f64> {
        self.spectrum(row * self.width + col)
    }

    pub fn same_shape(&self, other: &HsiCube) -> bool {
        self.height == other.height && self.width == other.width && self.grid == other.grid
    }

    /// Checks every sample; an empty report means all samples are finite and
    /// nonnegative.
    pub fn validate(&self) -> Diagnostics {
        let n = self.pixels();
        let issues = self
            .data
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| {
                let kind = if v.is_nan() {
                    IssueKind::NaN
                } else if v.is_infinite() {
                    IssueKind::Infinite
                } else if v < 0.0 {
                    IssueKind::Negative
                } else {
                    return None;
                };
                let band = i / n;
                let pix = i % n;
                Some(SampleIssue {
                    row: pix / self.width,
                    col: pix % self.width,
                    band,
                    kind,
                })
            })
            .collect();
        Diagnostics { issues }
    }

    /// Multiplies every sample by `factor`.
    pub fn scale(&self, factor: f64) -> Result<HsiCube> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        Ok(HsiCube {
            data: self.data.iter().map(|&v| v * factor).collect(),
            ..self.clone()
        })
    }

    /// The `h`×`w` sub-cube whose top-left pixel is (`top`, `left`).
    pub fn crop(&self, top: usize, left: usize, h: usize, w: usize) -> Result<HsiCube> {
        let fits = top.checked_add(h).is_some_and(|b| b <= self.height)
            && left.checked_add(w).is_some_and(|r| r <= self.width);
        if !fits || h == 0 || w == 0 {
            return Err(Error::Range(format!(
                "crop {h}x{w} at ({top},{left}) outside {}x{} cube",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(h * w * self.bands());
        for b in 0..self.bands() {
            let plane = self.band(b);
            for r in top..top + h {
                data.extend_from_slice(&plane[r * self.width + left..r * self.width + left + w]);
            }
        }
        HsiCube::new(h, w, self.grid, data)
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HsiCube {
        HsiCube {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Replaces negative samples with zero.
    pub fn clamp_nonnegative(&self) -> HsiCube {
        self.map(|v| v.max(0.0))
    }
}

/// Free-function form of [`HsiCube::scale`].
pub fn scale_cube(cube: &HsiCube, factor: f64) -> Result<HsiCube> {
    cube.scale(factor)
}

/// Free-function form of [`HsiCube::crop`].
pub fn crop_cube(cube: &HsiCube, top: usize, left: usize, h: usize, w: usize) -> Result<HsiCube> {
    cube.crop(top, left, h, w)
}

pub fn validate_cube(cube: &HsiCube) -> Diagnostics {
    cube.validate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    NaN,
    Infinite,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleIssue {
    pub row: usize,
    pub col: usize,
    pub band: usize,
    pub kind: IssueKind,
}

impl std::fmt::Display for SampleIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.kind {
            IssueKind::NaN => "NaN",
            IssueKind::Infinite => "infinite",
            IssueKind::Negative => "negative",
        };
        write!(f, "{what} sample at (row {}, col {}, band {})", self.row, self.col, self.band)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub issues: Vec<SampleIssue>,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> HsiCube {
        HsiCube::from_fn(h, w, WavelengthGrid::default(), |r, c, b| {
            1.0 + r as f64 * 0.25 + c as f64 * 0.5 + b as f64 * 0.125
        })
        .unwrap()
    }

    #[test]
    fn default_grid_spans_visible_range() {
        let g = WavelengthGrid::default();
        assert_eq!(g.bands, 31);
        assert_eq!(g.wavelength(0), 400.0);
        assert_eq!(g.end_nm(), 700.0);
    }

    #[test]
    fn grid_rejects_bad_step_and_empty() {
        assert!(WavelengthGrid::new(400.0, 0.0, 31).is_err());
        assert!(WavelengthGrid::new(400.0, -10.0, 31).is_err());
        assert!(WavelengthGrid::new(400.0, 10.0, 0).is_err());
    }

    #[test]
    fn new_checks_length() {
        let g = WavelengthGrid::default();
        assert!(HsiCube::new(2, 2, g, vec![0.0; 2 * 2 * 31]).is_ok());
        assert!(HsiCube::new(2, 2, g, vec![0.0; 2 * 2 * 30]).is_err());
    }

    #[test]
    fn scale_identity_and_constant() {
        let c = ramp(3, 4);
        assert_eq!(c.scale(1.0).unwrap(), c);
        let twos = HsiCube::filled(2, 2, WavelengthGrid::default(), 2.0).unwrap();
        let ones = twos.scale(0.5).unwrap();
        assert!(ones.data().iter().all(|&v| v == 1.0));
        assert_eq!(c.scale(2.0).unwrap().scale(0.5).unwrap(), c);
    }

    #[test]
    fn scale_rejects_bad_factor() {
        let c = ramp(2, 2);
        for f in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(c.scale(f), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn crop_full_frame_and_single_pixel() {
        let c = ramp(3, 4);
        assert_eq!(c.crop(0, 0, 3, 4).unwrap(), c);
        let px = c.crop(0, 0, 1, 1).unwrap();
        assert_eq!(px.data(), c.spectrum_at(0, 0).as_slice());
        let px = c.crop(2, 3, 1, 1).unwrap();
        assert_eq!(px.data(), c.spectrum_at(2, 3).as_slice());
    }

    #[test]
    fn crop_constant_stays_constant() {
        let c = HsiCube::filled(4, 4, WavelengthGrid::default(), 0.3).unwrap();
        let s = c.crop(1, 1, 2, 3).unwrap();
        assert_eq!((s.height(), s.width()), (2, 3));
        assert!(s.data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn crop_out_of_bounds_is_range_error() {
        let c = ramp(3, 4);
        assert!(matches!(c.crop(2, 0, 2, 1), Err(Error::Range(_))));
        assert!(matches!(c.crop(0, 3, 1, 2), Err(Error::Range(_))));
        assert!(matches!(c.crop(usize::MAX, 0, 2, 1), Err(Error::Range(_))));
    }

    #[test]
    fn crop_commutes_with_scale() {
        let c = ramp(5, 6);
        let a = c.scale(3.7).unwrap().crop(1, 2, 3, 3).unwrap();
        let b = c.crop(1, 2, 3, 3).unwrap().scale(3.7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validate_reports_coordinates() {
        let c = ramp(4, 4);
        assert!(c.validate().is_empty());

        let mut data = c.clone().into_data();
        let idx = c.index(3, 2, 10);
        data[idx] = f64::NAN;
        let bad = HsiCube::new(4, 4, *c.grid(), data).unwrap();
        let report = bad.validate();
        assert_eq!(
            report.issues,
            vec![SampleIssue { row: 3, col: 2, band: 10, kind: IssueKind::NaN }]
        );

        let mut data = c.clone().into_data();
        data[0] = -0.5;
        let neg = HsiCube::new(4, 4, *c.grid(), data).unwrap();
        let report = neg.validate();
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].kind, IssueKind::Negative);
        assert_eq!((report.issues[0].row, report.issues[0].col, report.issues[0].band), (0, 0, 0));
        assert!(HsiCube::new_radiance(4, 4, *c.grid(), neg.into_data()).is_err());
    }
}
