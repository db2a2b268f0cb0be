//! Basis functions plus a per-pixel weight predictor, fit by alternating
//! least squares.
//!
//! The model predicts `s = Bᵀ M f(rgb)` with basis `B` (k × bands) and weight
//! map `M` (k × features). Fitting minimizes
//!
//! ```text
//! J(B, M) = Σ_p ‖Bᵀ M f_p − s_p‖²_W + λ‖M‖² + λ‖B‖²
//! ```
//!
//! where `W = I` for the plain objective and `W = I + τ ΦᵀΦ` under the camera
//! prior, so the prior adds `τ‖Φ(ŝ − s)‖²`. Each half-step solves its block
//! exactly, hence `J` never increases.

use nalgebra::DMatrix;

use crate::css::CameraResponse;
use crate::cube::{HsiCube, WavelengthGrid};
use crate::error::{Error, Result};
use crate::recon::features::FeatureOrder;
use crate::recon::linalg::{solve_sylvester_spd, sym_eigen_sorted};
use crate::recon::linear::check_pairs;
use crate::rgb::RgbImage;

pub const DEFAULT_BASIS_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct BasisModel {
    pub order: FeatureOrder,
    pub grid: WavelengthGrid,
    pub k: usize,
    /// `k × bands`, row-major.
    pub basis: Vec<f64>,
    /// `k × features`, row-major.
    pub weight_map: Vec<f64>,
    pub lambda: f64,
}

impl BasisModel {
    pub fn new(
        order: FeatureOrder,
        grid: WavelengthGrid,
        k: usize,
        basis: Vec<f64>,
        weight_map: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        if k == 0 || k > grid.bands {
            return Err(Error::invalid(format!(
                "basis count must be in [1, {}], got {k}",
                grid.bands
            )));
        }
        if basis.len() != k * grid.bands || weight_map.len() != k * order.len() {
            return Err(Error::invalid("basis model dimensions are inconsistent"));
        }
        if basis.iter().chain(&weight_map).any(|v| !v.is_finite()) {
            return Err(Error::invalid("basis model parameters must be finite"));
        }
        Ok(BasisModel {
            order,
            grid,
            k,
            basis,
            weight_map,
            lambda,
        })
    }

    pub fn bands(&self) -> usize {
        self.grid.bands
    }

    pub fn features(&self) -> usize {
        self.order.len()
    }

    pub fn basis_row(&self, i: usize) -> &[f64] {
        &self.basis[i * self.bands()..(i + 1) * self.bands()]
    }

    /// Numerical rank of the basis. Below `k` when the weight map cannot
    /// excite every basis direction, e.g. `k` larger than the feature count.
    pub fn basis_rank(&self) -> usize {
        let b = DMatrix::from_row_slice(self.k, self.bands(), &self.basis);
        let sv = b.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > 1e-10 * max).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Plain,
    /// Adds `tau · ‖Φ(ŝ − s)‖²` to every pixel's residual.
    CssPrior { css: CameraResponse, tau: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFit {
    pub model: BasisModel,
    /// `J` after every half-step, in order: weight fit, then (basis refit,
    /// weight fit) per further iteration.
    pub trace: Vec<f64>,
}

struct Training {
    n: usize,
    nf: usize,
    bands: usize,
    /// Pixel-major `n × nf`.
    f: Vec<f64>,
    /// Pixel-major `n × bands`.
    s: Vec<f64>,
}

impl Training {
    fn collect(pairs: &[(RgbImage, HsiCube)], order: FeatureOrder) -> Training {
        let nf = order.len();
        let bands = pairs[0].1.bands();
        let n: usize = pairs.iter().map(|(_, c)| c.pixels()).sum();
        let mut f = vec![0.0; n * nf];
        let mut s = vec![0.0; n * bands];
        let mut base = 0;
        for (rgb, cube) in pairs {
            let np = cube.pixels();
            for p in 0..np {
                order.fill(rgb.pixel(p), &mut f[(base + p) * nf..(base + p + 1) * nf]);
                for b in 0..bands {
                    s[(base + p) * bands + b] = cube.data()[b * np + p];
                }
            }
            base += np;
        }
        Training { n, nf, bands, f, s }
    }

    fn feat(&self, p: usize) -> &[f64] {
        &self.f[p * self.nf..(p + 1) * self.nf]
    }

    fn spec(&self, p: usize) -> &[f64] {
        &self.s[p * self.bands..(p + 1) * self.bands]
    }

    /// `Σ f fᵀ`, `Σ s fᵀ` and `Σ s sᵀ`.
    fn moments(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let mut ff = DMatrix::zeros(self.nf, self.nf);
        let mut sf = DMatrix::zeros(self.bands, self.nf);
        let mut ss = DMatrix::zeros(self.bands, self.bands);
        for p in 0..self.n {
            let (f, s) = (self.feat(p), self.spec(p));
            for i in 0..self.nf {
                for j in 0..self.nf {
                    ff[(i, j)] += f[i] * f[j];
                }
            }
            for b in 0..self.bands {
                for j in 0..self.nf {
                    sf[(b, j)] += s[b] * f[j];
                }
                for c in 0..self.bands {
                    ss[(b, c)] += s[b] * s[c];
                }
            }
        }
        (ff, sf, ss)
    }
}

fn metric(objective: &Objective, grid: &WavelengthGrid) -> Result<(DMatrix<f64>, Option<(DMatrix<f64>, f64)>)> {
    let bands = grid.bands;
    match objective {
        Objective::Plain => Ok((DMatrix::identity(bands, bands), None)),
        Objective::CssPrior { css, tau } => {
            if css.grid() != grid {
                return Err(Error::invalid("camera prior grid does not match training cubes"));
            }
            if !(tau.is_finite() && *tau >= 0.0) {
                return Err(Error::invalid(format!("tau must be >= 0, got {tau}")));
            }
            let phi = css.matrix();
            let w = DMatrix::identity(bands, bands) + (phi.transpose() * &phi) * *tau;
            Ok((w, Some((phi, *tau))))
        }
    }
}

fn objective_value(
    data: &Training,
    basis: &DMatrix<f64>,
    map: &DMatrix<f64>,
    prior: &Option<(DMatrix<f64>, f64)>,
    lambda: f64,
) -> f64 {
    let k = basis.nrows();
    let mut total = 0.0;
    let mut w = vec![0.0; k];
    let mut e = vec![0.0; data.bands];
    for p in 0..data.n {
        let f = data.feat(p);
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = (0..data.nf).map(|j| map[(i, j)] * f[j]).sum();
        }
        let s = data.spec(p);
        for (b, eb) in e.iter_mut().enumerate() {
            *eb = (0..k).map(|i| basis[(i, b)] * w[i]).sum::<f64>() - s[b];
        }
        total += e.iter().map(|v| v * v).sum::<f64>();
        if let Some((phi, tau)) = prior {
            for ch in 0..3 {
                let r: f64 = (0..data.bands).map(|b| phi[(ch, b)] * e[b]).sum();
                total += tau * r * r;
            }
        }
    }
    total + lambda * (map.norm_squared() + basis.norm_squared())
}

/// Alternating least squares from an uncentered PCA start. `iterations = 1`
/// is the PCA basis followed by a single weight fit.
pub fn fit_basis(
    pairs: &[(RgbImage, HsiCube)],
    order: FeatureOrder,
    k: usize,
    lambda: f64,
    iterations: usize,
    objective: &Objective,
) -> Result<BasisFit> {
    let grid = check_pairs(pairs)?;
    if k == 0 || k > grid.bands {
        return Err(Error::invalid(format!(
            "basis count must be in [1, {}], got {k}",
            grid.bands
        )));
    }
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let (w, prior) = metric(objective, &grid)?;
    let data = Training::collect(pairs, order);
    let (ff, sf, ss) = data.moments();

    let (_, vecs) = sym_eigen_sorted(&ss);
    let mut basis = vecs.columns(0, k).transpose();
    let mut map = DMatrix::zeros(k, data.nf);
    let mut trace = Vec::with_capacity(2 * iterations);
    for t in 0..iterations {
        if t > 0 {
            let a = &map * &ff * map.transpose();
            let r = &map * sf.transpose() * &w;
            basis = solve_sylvester_spd(&a, &w, &r, lambda)?;
            trace.push(objective_value(&data, &basis, &map, &prior, lambda));
        }
        let a = &basis * &w * basis.transpose();
        let r = &basis * &w * &sf;
        map = solve_sylvester_spd(&a, &ff, &r, lambda)?;
        trace.push(objective_value(&data, &basis, &map, &prior, lambda));
    }

    let to_rows = |m: &DMatrix<f64>| {
        let mut v = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            v.extend(m.row(i).iter());
        }
        v
    };
    let model = BasisModel::new(order, grid, k, to_rows(&basis), to_rows(&map), lambda)?;
    Ok(BasisFit { model, trace })
}

/// Per pixel `Bᵀ (M f(rgb))`.
pub fn predict_basis(model: &BasisModel, rgb: &RgbImage) -> HsiCube {
    let n = rgb.pixels();
    let (k, nf, bands) = (model.k, model.features(), model.bands());
    let mut data = vec![0.0; n * bands];
    let mut f = vec![0.0; nf];
    let mut w = vec![0.0; k];
    for p in 0..n {
        model.order.fill(rgb.pixel(p), &mut f);
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &model.weight_map[i * nf..(i + 1) * nf];
            *wi = row.iter().zip(&f).map(|(a, b)| a * b).sum();
        }
        for b in 0..bands {
            data[b * n + p] = (0..k).map(|i| model.basis[i * bands + b] * w[i]).sum();
        }
    }
    HsiCube::new(rgb.height(), rgb.width(), model.grid, data).expect("shape follows rgb")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_basis_gives_constant_spectrum() {
        let grid = WavelengthGrid::default();
        let model = BasisModel::new(FeatureOrder::Linear, grid, 1, vec![1.0; 31], vec![0.5, 0.25, 0.0], 0.0).unwrap();
        let rgb = RgbImage::filled(2, 2, [2.0, 4.0, 9.0]).unwrap();
        let out = predict_basis(&model, &rgb);
        assert!(out.data().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn rejects_bad_k() {
        let rgb = RgbImage::filled(2, 2, [0.1, 0.2, 0.3]).unwrap();
        let cube = HsiCube::filled(2, 2, WavelengthGrid::default(), 1.0).unwrap();
        let pairs = vec![(rgb, cube)];
        assert!(fit_basis(&pairs, FeatureOrder::Linear, 32, 1e-3, 1, &Objective::Plain).is_err());
        assert!(fit_basis(&pairs, FeatureOrder::Linear, 0, 1e-3, 1, &Objective::Plain).is_err());
        assert!(fit_basis(&pairs, FeatureOrder::Linear, 3, 1e-3, 0, &Objective::Plain).is_err());
    }

    #[test]
    fn trace_has_one_entry_per_half_step() {
        let grid = WavelengthGrid::default();
        let rgb = RgbImage::from_fn(4, 4, |r, c, ch| 0.1 + ((r * 4 + c) * 3 + ch) as f64 * 0.013).unwrap();
        let cube = HsiCube::from_fn(4, 4, grid, |r, c, b| 0.2 + ((r + 2 * c + b) % 7) as f64 * 0.05).unwrap();
        let fit = fit_basis(&[(rgb, cube)], FeatureOrder::Quadratic, 4, 1e-6, 3, &Objective::Plain).unwrap();
        assert_eq!(fit.trace.len(), 5);
        for w in fit.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}
