//! Evaluation metrics and the composite fitting losses.
//!
//! Every function here is pure. Sums run in storage order so results do not
//! depend on how callers schedule work.

mod cluster;
mod ssim;

pub use cluster::{cluster_spectra, ClusterAssignment, KMEANS_MAX_ITERATIONS};
pub use ssim::{ssim, ssim_plane, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};

use serde::{Deserialize, Serialize};

use crate::camera::{bayer::reflect101, project_clean};
use crate::css::CameraResponse;
use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::rgb::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// MRAE denominators are `max(gt, denom_floor)`.
    pub denom_floor: f64,
    pub cluster_count: usize,
    pub cluster_seed: u64,
    /// Weight of the back-projection term in [`loss_combined`].
    pub tau: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            denom_floor: 1e-8,
            cluster_count: 1000,
            cluster_seed: 0,
            tau: 10.0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.denom_floor.is_finite() && self.denom_floor > 0.0) {
            return Err(Error::invalid(format!(
                "denom_floor must be positive, got {}",
                self.denom_floor
            )));
        }
        if self.cluster_count == 0 {
            return Err(Error::invalid("cluster_count must be at least 1"));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        Ok(())
    }
}

fn check_same(gt: &HsiCube, rec: &HsiCube) -> Result<()> {
    if gt.same_shape(rec) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "shape mismatch: gt {}x{}x{} vs rec {}x{}x{}",
            gt.height(),
            gt.width(),
            gt.bands(),
            rec.height(),
            rec.width(),
            rec.bands()
        )))
    }
}

#[inline]
fn rel_err(gt: f64, rec: f64, floor: f64) -> f64 {
    (gt - rec).abs() / gt.max(floor)
}

fn mrae_slices(gt: &[f64], rec: &[f64], floor: f64) -> f64 {
    let sum: f64 = gt.iter().zip(rec).map(|(&g, &r)| rel_err(g, r, floor)).sum();
    sum / gt.len() as f64
}

/// Mean relative absolute error over all pixel-band entries.
pub fn mrae(gt: &HsiCube, rec: &HsiCube, cfg: &MetricConfig) -> Result<f64> {
    check_same(gt, rec)?;
    Ok(mrae_slices(gt.data(), rec.data(), cfg.denom_floor))
}

/// Root mean squared error over all pixel-band entries.
pub fn rmse(gt: &HsiCube, rec: &HsiCube) -> Result<f64> {
    check_same(gt, rec)?;
    let sum: f64 = gt
        .data()
        .iter()
        .zip(rec.data())
        .map(|(&g, &r)| (g - r) * (g - r))
        .sum();
    Ok((sum / gt.data().len() as f64).sqrt())
}

/// MRAE pooled over every entry of every pair, rather than averaged per image.
pub fn mrae_pooled(pairs: &[(&HsiCube, &HsiCube)], cfg: &MetricConfig) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("no image pairs"));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (gt, rec) in pairs {
        check_same(gt, rec)?;
        sum += gt
            .data()
            .iter()
            .zip(rec.data())
            .map(|(&g, &r)| rel_err(g, r, cfg.denom_floor))
            .sum::<f64>();
        count += gt.data().len();
    }
    Ok(sum / count as f64)
}

/// Nearest-rank quantile `q` in [0, 1] of the per-entry relative errors.
/// A diagnostic only.
pub fn relative_error_quantile(gt: &HsiCube, rec: &HsiCube, cfg: &MetricConfig, q: f64) -> Result<f64> {
    check_same(gt, rec)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("quantile must be in [0, 1], got {q}")));
    }
    let mut errs: Vec<f64> = gt
        .data()
        .iter()
        .zip(rec.data())
        .map(|(&g, &r)| rel_err(g, r, cfg.denom_floor))
        .collect();
    errs.sort_by(f64::total_cmp);
    let rank = (q * errs.len() as f64).ceil() as usize;
    Ok(errs[rank.clamp(1, errs.len()) - 1])
}

/// Mean over spectral clusters of the per-cluster MRAE. Each material counts
/// once regardless of how many pixels it covers; empty clusters are skipped.
pub fn weighted_mrae(gt: &HsiCube, rec: &HsiCube, cfg: &MetricConfig) -> Result<f64> {
    check_same(gt, rec)?;
    let clusters = cluster_spectra(gt, cfg)?;
    weighted_mrae_with(gt, rec, &clusters, cfg)
}

/// [`weighted_mrae`] with a precomputed clustering of `gt`.
pub fn weighted_mrae_with(
    gt: &HsiCube,
    rec: &HsiCube,
    clusters: &ClusterAssignment,
    cfg: &MetricConfig,
) -> Result<f64> {
    check_same(gt, rec)?;
    let n = gt.pixels();
    if clusters.labels.len() != n {
        return Err(Error::invalid(format!(
            "cluster labels cover {} pixels, cube has {n}",
            clusters.labels.len()
        )));
    }
    let k = clusters.k();
    let mut sums = vec![0.0; k];
    let mut members = vec![0usize; k];
    for &l in &clusters.labels {
        members[l] += 1;
    }
    // Storage order, so a single cluster reproduces `mrae` bit for bit.
    for (i, (&g, &r)) in gt.data().iter().zip(rec.data()).enumerate() {
        sums[clusters.labels[i % n]] += rel_err(g, r, cfg.denom_floor);
    }
    let bands = gt.bands() as f64;
    let per_cluster: Vec<f64> = sums
        .iter()
        .zip(&members)
        .filter(|(_, &m)| m > 0)
        .map(|(&s, &m)| s / (m as f64 * bands))
        .collect();
    Ok(per_cluster.iter().sum::<f64>() / per_cluster.len() as f64)
}

/// Three-channel MRAE between `original_rgb` and the RGB re-rendered from
/// `rec` through `css`.
pub fn physical_consistency(
    rec: &HsiCube,
    css: &CameraResponse,
    original_rgb: &RgbImage,
    cfg: &MetricConfig,
) -> Result<f64> {
    if !(rec.height() == original_rgb.height() && rec.width() == original_rgb.width()) {
        return Err(Error::invalid(format!(
            "rgb {}x{} does not match reconstruction {}x{}",
            original_rgb.height(),
            original_rgb.width(),
            rec.height(),
            rec.width()
        )));
    }
    let regenerated = project_clean(rec, css)?;
    rgb_mrae(original_rgb, &regenerated, cfg)
}

/// Three-channel form of [`mrae`], `reference` in the denominator.
pub fn rgb_mrae(reference: &RgbImage, other: &RgbImage, cfg: &MetricConfig) -> Result<f64> {
    if !reference.same_shape(other) {
        return Err(Error::invalid(format!(
            "rgb shape mismatch: {}x{} vs {}x{}",
            reference.height(),
            reference.width(),
            other.height(),
            other.width()
        )));
    }
    Ok(mrae_slices(reference.data(), other.data(), cfg.denom_floor))
}

/// Relative-error loss; numerically identical to [`mrae`].
pub fn loss_rel(gt: &HsiCube, rec: &HsiCube, cfg: &MetricConfig) -> Result<f64> {
    mrae(gt, rec, cfg)
}

/// Mean absolute difference between the RGB projections of `gt` and `rec`.
pub fn loss_backproj(gt: &HsiCube, rec: &HsiCube, css: &CameraResponse) -> Result<f64> {
    check_same(gt, rec)?;
    let a = project_clean(gt, css)?;
    let b = project_clean(rec, css)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.data().len() as f64)
}

/// `loss_rel + tau * loss_backproj`.
pub fn loss_combined(gt: &HsiCube, rec: &HsiCube, css: &CameraResponse, cfg: &MetricConfig) -> Result<f64> {
    Ok(loss_rel(gt, rec, cfg)? + cfg.tau * loss_backproj(gt, rec, css)?)
}

/// 4-neighbour Laplacian of one band plane, reflect-101 borders.
pub fn laplacian(plane: &[f64], height: usize, width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(plane.len());
    let at = |r: isize, c: isize| plane[reflect101(r, height) * width + reflect101(c, width)];
    for r in 0..height as isize {
        for c in 0..width as isize {
            let neighbours = (at(r - 1, c) + at(r + 1, c)) + (at(r, c - 1) + at(r, c + 1));
            out.push(neighbours - 4.0 * at(r, c));
        }
    }
    out
}

/// Mean absolute difference of per-band Laplacian responses.
pub fn loss_gradient(gt: &HsiCube, rec: &HsiCube) -> Result<f64> {
    check_same(gt, rec)?;
    let (h, w) = (gt.height(), gt.width());
    let mut sum = 0.0;
    for b in 0..gt.bands() {
        let lg = laplacian(gt.band(b), h, w);
        let lr = laplacian(rec.band(b), h, w);
        sum += lg.iter().zip(&lr).map(|(x, y)| (x - y).abs()).sum::<f64>();
    }
    Ok(sum / gt.data().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::WavelengthGrid;

    fn triple(v: [f64; 3]) -> HsiCube {
        let grid = WavelengthGrid::new(400.0, 10.0, 3).unwrap();
        HsiCube::new(1, 1, grid, v.to_vec()).unwrap()
    }

    #[test]
    fn hand_fixture() {
        let gt = triple([1.0, 2.0, 4.0]);
        let rec = triple([1.1, 1.8, 4.0]);
        let cfg = MetricConfig::default();
        assert!((mrae(&gt, &rec, &cfg).unwrap() - 0.2 / 3.0).abs() < 1e-12);
        assert!((rmse(&gt, &rec).unwrap() - (0.05f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(rmse(&gt, &rec).unwrap(), rmse(&rec, &gt).unwrap());
        assert_eq!(loss_rel(&gt, &rec, &cfg).unwrap(), mrae(&gt, &rec, &cfg).unwrap());
    }

    #[test]
    fn zero_gt_uses_floor() {
        let gt = triple([0.0, 1.0, 1.0]);
        let rec = triple([1e-9, 1.0, 1.0]);
        let m = mrae(&gt, &rec, &MetricConfig::default()).unwrap();
        assert!((m - 0.1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let a = triple([1.0; 3]);
        let b = HsiCube::filled(1, 2, *a.grid(), 1.0).unwrap();
        assert!(mrae(&a, &b, &MetricConfig::default()).is_err());
        assert!(rmse(&a, &b).is_err());
    }

    #[test]
    fn quantile_endpoints() {
        let gt = triple([1.0, 2.0, 4.0]);
        let rec = triple([1.1, 1.8, 4.0]);
        let cfg = MetricConfig::default();
        assert_eq!(relative_error_quantile(&gt, &rec, &cfg, 0.0).unwrap(), 0.0);
        assert!((relative_error_quantile(&gt, &rec, &cfg, 1.0).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn laplacian_kills_constants_and_offsets() {
        let grid = WavelengthGrid::new(400.0, 10.0, 2).unwrap();
        let gt = HsiCube::from_fn(5, 6, grid, |r, c, b| (r * 7 + c * 3 + b) as f64 * 0.1).unwrap();
        let rec = HsiCube::from_fn(5, 6, grid, |r, c, b| gt.get(r, c, b) + 0.5 + b as f64).unwrap();
        assert!(loss_gradient(&gt, &rec).unwrap() < 1e-12);
    }

    #[test]
    fn combined_zero_tau_is_rel() {
        let css = CameraResponse::default();
        let gt = HsiCube::from_fn(2, 2, *css.grid(), |r, c, b| 1.0 + (r + c + b) as f64).unwrap();
        let rec = gt.scale(1.1).unwrap();
        let cfg = MetricConfig {
            tau: 0.0,
            ..Default::default()
        };
        assert_eq!(loss_combined(&gt, &rec, &css, &cfg).unwrap(), loss_rel(&gt, &rec, &cfg).unwrap());
        assert_eq!(loss_combined(&gt, &gt, &css, &MetricConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(MetricConfig::default().validate().is_ok());
        let bad = MetricConfig {
            denom_floor: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
