//! Camera spectral sensitivity: the 3×B matrix mapping a spectrum to linear RGB.

use nalgebra::DMatrix;

use crate::cube::WavelengthGrid;
use crate::error::{Error, Result};

/// Smallest accepted ratio of the third to the first singular value.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CameraResponse {
    grid: WavelengthGrid,
    /// Row-major, one row of `grid.bands` weights per channel (R, G, B).
    weights: Vec<f64>,
}

impl CameraResponse {
    /// Validates nonnegativity, finiteness and rank 3.
    pub fn new(grid: WavelengthGrid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != 3 * grid.bands {
            return Err(Error::invalid(format!(
                "sensitivity matrix has {} weights, expected 3x{}",
                weights.len(),
                grid.bands
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(format!(
                "sensitivity weight for channel {} band {} is {}",
                i / grid.bands,
                i % grid.bands,
                weights[i]
            )));
        }
        let css = CameraResponse { grid, weights };
        let sv = css.singular_values();
        if grid.bands < 3 || sv[2] <= RANK_TOLERANCE * sv[0] {
            return Err(Error::invalid(format!(
                "sensitivity matrix is rank deficient (singular values {sv:?})"
            )));
        }
        Ok(css)
    }

    pub fn from_rows(grid: WavelengthGrid, r: &[f64], g: &[f64], b: &[f64]) -> Result<Self> {
        let mut w = Vec::with_capacity(3 * grid.bands);
        w.extend_from_slice(r);
        w.extend_from_slice(g);
        w.extend_from_slice(b);
        Self::new(grid, w)
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn bands(&self) -> usize {
        self.grid.bands
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        let n = self.grid.bands;
        &self.weights[channel * n..(channel + 1) * n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, self.grid.bands, &self.weights)
    }

    /// Descending singular values.
    pub fn singular_values(&self) -> [f64; 3] {
        let m = self.matrix();
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv.resize(3, 0.0);
        [sv[0], sv[1], sv[2]]
    }

    /// Linear RGB of one spectrum.
    #[inline]
    pub fn apply(&self, spectrum: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (ch, o) in out.iter_mut().enumerate() {
            *o = self
                .row(ch)
                .iter()
                .zip(spectrum)
                .map(|(w, s)| w * s)
                .sum();
        }
        out
    }

    /// A smooth three-lobe response on `grid`, used when no sensitivity file
    /// is supplied. Each channel peaks at 1.0.
    pub fn default_for(grid: WavelengthGrid) -> Result<Self> {
        fn lobe(x: f64, mu: f64, sigma: f64) -> f64 {
            (-0.5 * ((x - mu) / sigma).powi(2)).exp()
        }
        let curves: [&dyn Fn(f64) -> f64; 3] = [
            &|x| lobe(x, 600.0, 32.0) + 0.08 * lobe(x, 445.0, 22.0),
            &|x| lobe(x, 535.0, 38.0),
            &|x| lobe(x, 460.0, 28.0) + 0.03 * lobe(x, 560.0, 30.0),
        ];
        let mut weights = Vec::with_capacity(3 * grid.bands);
        for curve in curves {
            let row: Vec<f64> = grid.wavelengths().map(curve).collect();
            let peak = row.iter().cloned().fold(0.0_f64, f64::max);
            let peak = if peak > 0.0 { peak } else { 1.0 };
            weights.extend(row.iter().map(|v| v / peak));
        }
        Self::new(grid, weights)
    }
}

impl Default for CameraResponse {
    fn default() -> Self {
        Self::default_for(WavelengthGrid::default()).expect("default response is rank 3")
    }
}
