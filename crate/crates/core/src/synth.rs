//! Synthetic scenes: a few smooth material spectra laid out as Voronoi
//! regions, with a smooth shading field and mild per-pixel texture.

use serde::{Deserialize, Serialize};

use crate::cube::{HsiCube, WavelengthGrid};
use crate::error::{Error, Result};
use crate::rng::{salt, SplitMix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub height: usize,
    pub width: usize,
    pub materials: usize,
    /// Relative amplitude of per-pixel texture.
    pub texture: f64,
    pub seed: u64,
    /// When nonzero, every material is a nonnegative mix of this many
    /// spectra shared by all scenes of the family, so all pixels lie in one
    /// low-dimensional subspace.
    pub shared_spectra: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            height: 32,
            width: 32,
            materials: 6,
            texture: 0.05,
            seed: 0,
            shared_spectra: 0,
        }
    }
}

/// A reflectance-like spectrum: baseline plus two or three Gaussian bumps,
/// strictly positive.
fn material(rng: &mut SplitMix, grid: &WavelengthGrid) -> Vec<f64> {
    let base = 0.05 + 0.3 * rng.uniform();
    let bumps = 2 + rng.below(2) as usize;
    let params: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| {
            let centre = grid.start_nm + rng.uniform() * (grid.end_nm() - grid.start_nm);
            let width = 20.0 + 60.0 * rng.uniform();
            let amp = 0.1 + 0.6 * rng.uniform();
            (centre, width, amp)
        })
        .collect();
    grid.wavelengths()
        .map(|wl| {
            base + params
                .iter()
                .map(|&(c, w, a)| a * (-0.5 * ((wl - c) / w).powi(2)).exp())
                .sum::<f64>()
        })
        .collect()
}

/// The shared spectra of a family; independent of the scene index.
pub fn shared_spectra(cfg: &SynthConfig, grid: &WavelengthGrid) -> Vec<Vec<f64>> {
    let mut rng = SplitMix::for_site(cfg.seed, salt::SYNTH, u64::MAX);
    (0..cfg.shared_spectra).map(|_| material(&mut rng, grid)).collect()
}

/// Scene number `index` of the family defined by `cfg`.
pub fn synth_scene(cfg: &SynthConfig, grid: WavelengthGrid, index: u64) -> Result<HsiCube> {
    if cfg.materials == 0 {
        return Err(Error::invalid("need at least one material"));
    }
    if !(cfg.texture.is_finite() && (0.0..1.0).contains(&cfg.texture)) {
        return Err(Error::invalid(format!("texture must be in [0, 1), got {}", cfg.texture)));
    }
    let mut rng = SplitMix::for_site(cfg.seed, salt::SYNTH, index);
    let mats: Vec<Vec<f64>> = if cfg.shared_spectra == 0 {
        (0..cfg.materials).map(|_| material(&mut rng, &grid)).collect()
    } else {
        let shared = shared_spectra(cfg, &grid);
        (0..cfg.materials)
            .map(|_| {
                let mix: Vec<f64> = shared.iter().map(|_| 0.1 + rng.uniform()).collect();
                (0..grid.bands)
                    .map(|b| shared.iter().zip(&mix).map(|(s, m)| s[b] * m).sum())
                    .collect()
            })
            .collect()
    };
    let sites: Vec<(f64, f64, usize)> = (0..cfg.materials * 2)
        .map(|i| {
            (
                rng.uniform() * cfg.height as f64,
                rng.uniform() * cfg.width as f64,
                i % cfg.materials,
            )
        })
        .collect();
    let (gy, gx, g0) = (rng.uniform() - 0.5, rng.uniform() - 0.5, 0.6 + 0.4 * rng.uniform());
    let (h, w) = (cfg.height, cfg.width);

    let mut label = vec![0usize; h * w];
    let mut shade = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
            let nearest = sites
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - y).powi(2) + (a.1 - x).powi(2);
                    let db = (b.0 - y).powi(2) + (b.1 - x).powi(2);
                    da.total_cmp(&db)
                })
                .expect("at least one site");
            label[r * w + c] = nearest.2;
            let s = g0 + 0.5 * (gy * y / h as f64 + gx * x / w as f64);
            let tex = 1.0 + cfg.texture * (2.0 * SplitMix::for_site(cfg.seed ^ index, salt::SYNTH, (r * w + c) as u64).uniform() - 1.0);
            shade[r * w + c] = s.max(0.05) * tex;
        }
    }
    HsiCube::from_fn(h, w, grid, |r, c, b| mats[label[r * w + c]][b] * shade[r * w + c])
}
