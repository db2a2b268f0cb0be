//! Shot and dark noise on the mosaic plane.

use crate::camera::bayer::BayerMosaic;
use crate::error::{Error, Result};
use crate::rng::{salt, SplitMix};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    /// Expected photon count per unit of linear signal. Zero disables shot noise.
    pub photon_gain: f64,
    /// Standard deviation of the additive Gaussian dark noise, in signal units.
    pub dark_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            photon_gain: 1000.0,
            dark_sigma: 0.003,
            seed: 0,
        }
    }
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams {
        photon_gain: 0.0,
        dark_sigma: 0.0,
        seed: 0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.photon_gain.is_finite() && self.photon_gain >= 0.0) {
            return Err(Error::invalid(format!(
                "photon gain must be finite and >= 0, got {}",
                self.photon_gain
            )));
        }
        if !(self.dark_sigma.is_finite() && self.dark_sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "dark sigma must be finite and >= 0, got {}",
                self.dark_sigma
            )));
        }
        Ok(())
    }

    /// Noise for one site, given its linear value and row-major index.
    #[inline]
    pub fn sample_site(&self, value: f64, site: u64) -> f64 {
        let mut v = value;
        if self.photon_gain > 0.0 {
            let mut shot = SplitMix::for_site(self.seed, salt::SHOT, site);
            v = shot.poisson(self.photon_gain * value) / self.photon_gain;
        }
        if self.dark_sigma > 0.0 {
            let mut dark = SplitMix::for_site(self.seed, salt::DARK, site);
            v += self.dark_sigma * dark.normal();
        }
        v.max(0.0)
    }
}

/// Replaces each sample `x` with `Poisson(g·x)/g + N(0, σ²)`, clamped at zero.
///
/// Every site draws from its own counter-based stream keyed by
/// `(seed, site index)`, so the output does not depend on traversal order.
pub fn add_sensor_noise(m: &BayerMosaic, p: &NoiseParams) -> Result<BayerMosaic> {
    p.validate()?;
    if let Some(i) = m.data().iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "mosaic sample {} at site {i} must be finite and >= 0",
            m.data()[i]
        )));
    }
    let mut out = m.clone();
    if p.photon_gain == 0.0 && p.dark_sigma == 0.0 {
        return Ok(out);
    }
    for (site, v) in out.data_mut().iter_mut().enumerate() {
        *v = p.sample_site(*v, site as u64);
    }
    Ok(out)
}
