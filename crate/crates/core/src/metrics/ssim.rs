//! Structural similarity with a Gaussian window, evaluated on valid windows
//! only (no padding).

use crate::cube::HsiCube;
use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, t) in g.iter_mut().enumerate() {
        let x = i as f64 - half;
        *t = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|t| *t /= s);
    g
}

/// Separable Gaussian filter, valid region: output is (h-10)×(w-10).
fn filter_valid(x: &[f64], h: usize, w: usize, g: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            let line = &x[r * w + c..r * w + c + SSIM_WINDOW];
            rows[r * ow + c] = line.iter().zip(g).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..SSIM_WINDOW).map(|i| rows[(r + i) * ow + c] * g[i]).sum();
        }
    }
    out
}

/// Mean SSIM between two single-channel planes. `data_range` is the `L` in
/// the stabilizing constants.
pub fn ssim_plane(a: &[f64], b: &[f64], height: usize, width: usize, data_range: f64) -> Result<f64> {
    if a.len() != height * width || b.len() != a.len() {
        return Err(Error::invalid("ssim planes must match the stated shape"));
    }
    if height < SSIM_WINDOW || width < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {height}x{width}"
        )));
    }
    if !(data_range.is_finite() && data_range > 0.0) {
        return Err(Error::invalid(format!("ssim data range must be positive, got {data_range}")));
    }
    let g = gaussian_taps();
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(a, height, width, &g);
    let mu_b = filter_valid(b, height, width, &g);
    let e_aa = filter_valid(&aa, height, width, &g);
    let e_bb = filter_valid(&bb, height, width, &g);
    let e_ab = filter_valid(&ab, height, width, &g);
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / mu_a.len() as f64)
}

/// Per-band SSIM averaged over bands. `L` is the maximum of `gt` (1 if the
/// cube is all zeros).
pub fn ssim(gt: &HsiCube, rec: &HsiCube) -> Result<f64> {
    if !gt.same_shape(rec) {
        return Err(Error::invalid("ssim shape mismatch"));
    }
    let max = gt.data().iter().cloned().fold(0.0, f64::max);
    let range = if max > 0.0 { max } else { 1.0 };
    let mut sum = 0.0;
    for b in 0..gt.bands() {
        sum += ssim_plane(gt.band(b), rec.band(b), gt.height(), gt.width(), range)?;
    }
    Ok(sum / gt.bands() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::WavelengthGrid;

    #[test]
    fn identical_is_one() {
        let a: Vec<f64> = (0..144).map(|i| ((i * 37) % 17) as f64 / 17.0).collect();
        assert!((ssim_plane(&a, &a, 12, 12, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let c = vec![0.4; 144];
        assert!((ssim_plane(&c, &c, 12, 12, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_small() {
        let a = vec![0.0; 100];
        assert!(ssim_plane(&a, &a, 10, 10, 1.0).is_err());
    }

    #[test]
    fn cube_form_averages_bands() {
        let grid = WavelengthGrid::new(400.0, 10.0, 2).unwrap();
        let gt = HsiCube::from_fn(11, 11, grid, |r, c, b| (r * 11 + c + b) as f64).unwrap();
        assert!((ssim(&gt, &gt).unwrap() - 1.0).abs() < 1e-12);
    }
}
