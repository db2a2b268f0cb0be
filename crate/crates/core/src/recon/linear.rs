//! Direct linear estimates: the Moore-Penrose inverse of the camera response
//! and ridge regression from RGB features to spectra.

use nalgebra::DMatrix;

use crate::css::CameraResponse;
use crate::cube::{HsiCube, WavelengthGrid};
use crate::error::{Error, Result};
use crate::recon::features::FeatureOrder;
use crate::recon::linalg::cholesky_solve;
use crate::rgb::RgbImage;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub order: FeatureOrder,
    pub grid: WavelengthGrid,
    /// `bands × features`, row-major.
    pub weights: Vec<f64>,
    pub lambda: f64,
}

impl LinearModel {
    pub fn new(order: FeatureOrder, grid: WavelengthGrid, weights: Vec<f64>, lambda: f64) -> Result<Self> {
        if weights.len() != grid.bands * order.len() {
            return Err(Error::invalid(format!(
                "linear weights need {}x{} entries, got {}",
                grid.bands,
                order.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("linear weights must be finite"));
        }
        Ok(LinearModel {
            order,
            grid,
            weights,
            lambda,
        })
    }

    pub fn bands(&self) -> usize {
        self.grid.bands
    }

    pub fn features(&self) -> usize {
        self.order.len()
    }

    pub fn weight(&self, band: usize, feature: usize) -> f64 {
        self.weights[band * self.features() + feature]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

pub(crate) fn check_pairs(pairs: &[(RgbImage, HsiCube)]) -> Result<WavelengthGrid> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::invalid("training set is empty"))?;
    let grid = *first.1.grid();
    for (i, (rgb, cube)) in pairs.iter().enumerate() {
        if rgb.height() != cube.height() || rgb.width() != cube.width() {
            return Err(Error::invalid(format!(
                "pair {i}: rgb {}x{} vs cube {}x{}",
                rgb.height(),
                rgb.width(),
                cube.height(),
                cube.width()
            )));
        }
        if *cube.grid() != grid {
            return Err(Error::invalid(format!("pair {i}: wavelength grid differs from pair 0")));
        }
    }
    Ok(grid)
}

/// Ridge regression `min Σ‖W f(rgb) − s‖² + λ‖W‖²` over every training pixel,
/// solved through the normal equations.
pub fn fit_linear(pairs: &[(RgbImage, HsiCube)], order: FeatureOrder, lambda: f64) -> Result<LinearModel> {
    let grid = check_pairs(pairs)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let nf = order.len();
    let bands = grid.bands;
    let mut ftf = DMatrix::<f64>::zeros(nf, nf);
    let mut fts = DMatrix::<f64>::zeros(nf, bands);
    let mut f = vec![0.0; nf];
    for (rgb, cube) in pairs {
        let n = cube.pixels();
        for p in 0..n {
            order.fill(rgb.pixel(p), &mut f);
            for i in 0..nf {
                for j in 0..nf {
                    ftf[(i, j)] += f[i] * f[j];
                }
            }
            for b in 0..bands {
                let s = cube.data()[b * n + p];
                for i in 0..nf {
                    fts[(i, b)] += f[i] * s;
                }
            }
        }
    }
    for i in 0..nf {
        ftf[(i, i)] += lambda;
    }
    let x = cholesky_solve(&ftf, &fts)?;
    let mut w = vec![0.0; bands * nf];
    for b in 0..bands {
        for i in 0..nf {
            w[b * nf + i] = x[(i, b)];
        }
    }
    LinearModel::new(order, grid, w, lambda)
}

/// Per pixel `W · f(rgb)`.
pub fn predict_linear(model: &LinearModel, rgb: &RgbImage) -> HsiCube {
    let n = rgb.pixels();
    let nf = model.features();
    let bands = model.bands();
    let mut data = vec![0.0; n * bands];
    let mut f = vec![0.0; nf];
    for p in 0..n {
        model.order.fill(rgb.pixel(p), &mut f);
        for b in 0..bands {
            let row = &model.weights[b * nf..(b + 1) * nf];
            data[b * n + p] = row.iter().zip(&f).map(|(w, x)| w * x).sum();
        }
    }
    HsiCube::new(rgb.height(), rgb.width(), model.grid, data).expect("shape follows rgb")
}

/// `Φᵀ(ΦΦᵀ)⁻¹`, bands × 3 row-major.
pub fn pseudoinverse_matrix(css: &CameraResponse) -> Result<Vec<f64>> {
    let phi = css.matrix();
    let gram = &phi * phi.transpose();
    let inv = gram
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::invalid("camera response is rank deficient"))?;
    let [s0, _, s2] = css.singular_values();
    if !(s2 > crate::css::RANK_TOLERANCE * s0) {
        return Err(Error::invalid("camera response is rank deficient"));
    }
    let p = phi.transpose() * inv;
    let bands = css.bands();
    let mut out = vec![0.0; bands * 3];
    for b in 0..bands {
        for ch in 0..3 {
            out[b * 3 + ch] = p[(b, ch)];
        }
    }
    Ok(out)
}

/// Minimum-norm spectrum reproducing each pixel's RGB exactly under `css`.
/// Negative samples are kept; see [`HsiCube::clamp_nonnegative`].
pub fn pseudoinverse_estimate(css: &CameraResponse, rgb: &RgbImage) -> Result<HsiCube> {
    let p = pseudoinverse_matrix(css)?;
    let n = rgb.pixels();
    let bands = css.bands();
    let mut data = vec![0.0; n * bands];
    for px in 0..n {
        let v = rgb.pixel(px);
        for b in 0..bands {
            let row = &p[b * 3..b * 3 + 3];
            data[b * n + px] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
    }
    HsiCube::new(rgb.height(), rgb.width(), *css.grid(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::project_clean;

    #[test]
    fn orthonormal_rows_give_transpose() {
        let grid = WavelengthGrid::default();
        let mut w = vec![0.0; 93];
        w[5] = 1.0;
        w[31 + 12] = 1.0;
        w[62 + 20] = 1.0;
        let css = CameraResponse::new(grid, w).unwrap();
        let rgb = RgbImage::new(1, 1, vec![0.3, 0.6, 0.9]).unwrap();
        let s = pseudoinverse_estimate(&css, &rgb).unwrap();
        assert!((s.get(0, 0, 5) - 0.3).abs() < 1e-15);
        assert!((s.get(0, 0, 12) - 0.6).abs() < 1e-15);
        assert!((s.get(0, 0, 20) - 0.9).abs() < 1e-15);
        assert_eq!(s.get(0, 0, 0), 0.0);
    }

    #[test]
    fn pseudoinverse_reprojects() {
        let css = CameraResponse::default();
        let rgb = RgbImage::from_fn(3, 2, |r, c, ch| 0.1 + (r * 5 + c * 3 + ch) as f64 * 0.07).unwrap();
        let back = project_clean(&pseudoinverse_estimate(&css, &rgb).unwrap(), &css).unwrap();
        for (a, b) in back.data().iter().zip(rgb.data()) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn identical_pixels_singular_without_ridge() {
        let rgb = RgbImage::filled(2, 2, [0.2, 0.3, 0.4]).unwrap();
        let cube = HsiCube::filled(2, 2, WavelengthGrid::default(), 1.0).unwrap();
        let pairs = vec![(rgb, cube)];
        assert!(matches!(fit_linear(&pairs, FeatureOrder::Linear, 0.0), Err(Error::Solver(_))));
        assert!(fit_linear(&pairs, FeatureOrder::Linear, 1e-3).is_ok());
        assert!(fit_linear(&[], FeatureOrder::Linear, 1.0).is_err());
    }
}
