//! Deterministic random streams.
//!
//! Nothing here depends on the `rand` crate's internal algorithms, so noise
//! realisations are stable across dependency upgrades and platforms. Noise is
//! drawn from counter-based streams keyed by `(seed, purpose, site)`: a site's
//! draws never depend on iteration order or on how work was split across
//! threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Top 53 bits as a double in [0, 1).
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stream purposes; distinct salts keep shot and dark noise independent.
pub mod salt {
    pub const SHOT: u64 = 0x5348_4f54_0000_0001;
    pub const DARK: u64 = 0x4441_524b_0000_0002;
    pub const SHUFFLE: u64 = 0x5348_5546_0000_0003;
    pub const KMEANS: u64 = 0x4b4d_4e53_0000_0004;
    pub const SYNTH: u64 = 0x5359_4e54_0000_0005;
}

/// A SplitMix64 sequence. Used both as a sequential generator and, via
/// [`SplitMix::for_site`], as a per-site counter-based stream.
#[derive(Debug, Clone)]
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    /// Independent stream for one `(seed, purpose, site)` key.
    pub fn for_site(seed: u64, purpose: u64, site: u64) -> Self {
        let key = splitmix64(seed ^ purpose) ^ site.wrapping_mul(0xD1B5_4A32_D192_ED03);
        SplitMix {
            state: splitmix64(key),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform in (0, 1], safe to take the logarithm of.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Unbiased integer in `0..n` (Lemire's multiply-and-reject).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal via Box-Muller (cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Poisson variate with the given mean.
    ///
    /// Means below [`POISSON_INVERSION_LIMIT`] use sequential-search
    /// inversion; larger means use Hörmann's transformed rejection (PTRS).
    pub fn poisson(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        if mean < POISSON_INVERSION_LIMIT {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> f64 {
        let u = self.uniform();
        let mut k = 0u32;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u >= cdf {
            k += 1;
            p *= mean / f64::from(k);
            let next = cdf + p;
            // Tail mass below double precision.
            if next == cdf {
                break;
            }
            cdf = next;
        }
        f64::from(k)
    }

    fn poisson_ptrs(&mut self, mean: f64) -> f64 {
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -mean + k * loglam - ln_factorial(k);
            if lhs <= rhs {
                return k;
            }
        }
    }
}

/// Means at or above this use transformed rejection.
pub const POISSON_INVERSION_LIMIT: f64 = 10.0;

/// ln(k!) for a nonnegative integer-valued `k`.
pub fn ln_factorial(k: f64) -> f64 {
    if k < 16.0 {
        let mut acc = 0.0;
        let mut i = 2.0;
        while i <= k {
            acc += f64::ln(i);
            i += 1.0;
        }
        return acc;
    }
    // Stirling series for ln Γ(k + 1).
    let n = k + 1.0;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    (n - 0.5) * n.ln() - n + 0.5 * std::f64::consts::TAU.ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Seed for one scene, derived from a run seed and the scene id so that
/// reordering a manifest does not change any scene's noise.
pub fn scene_seed(seed: u64, scene_id: &str) -> u64 {
    // FNV-1a over the id bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in scene_id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(SplitMix::for_site(7, salt::SHOT, 3), |s, _| Some(s.next_u64())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(SplitMix::for_site(7, salt::SHOT, 3), |s, _| Some(s.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(SplitMix::for_site(7, salt::SHOT, 4).next_u64(), a[0]);
        assert_ne!(SplitMix::for_site(7, salt::DARK, 3).next_u64(), a[0]);
    }

    #[test]
    fn ln_factorial_matches_direct_sum() {
        for k in 0..200u32 {
            let direct: f64 = (2..=k).map(|i| f64::from(i).ln()).sum();
            let got = ln_factorial(f64::from(k));
            assert!((got - direct).abs() <= 1e-10 * direct.max(1.0), "k={k}: {got} vs {direct}");
        }
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = SplitMix::new(1);
        for n in 1..50 {
            assert!(r.below(n) < n);
        }
    }

    fn moments(samples: &[f64]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn poisson_moments_both_regimes() {
        for &lam in &[0.3, 4.0, 9.9, 10.0, 37.5, 1000.0] {
            let mut r = SplitMix::new(99);
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| r.poisson(lam)).collect();
            let (m, v) = moments(&xs);
            let se = (lam / n as f64).sqrt();
            assert!((m - lam).abs() < 4.0 * se, "lam={lam} mean={m}");
            assert!((v / lam - 1.0).abs() < 0.03, "lam={lam} var={v}");
        }
    }

    #[test]
    fn poisson_small_mean_pmf() {
        // P(0) = e^-2, P(1) = 2 e^-2
        let mut r = SplitMix::new(5);
        let n = 400_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let k = r.poisson(2.0) as usize;
            if k < 3 {
                counts[k] += 1;
            }
        }
        let p0 = (-2.0f64).exp();
        for (k, expect) in [(0, p0), (1, 2.0 * p0), (2, 2.0 * p0)] {
            let got = counts[k] as f64 / n as f64;
            let se = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!((got - expect).abs() < 4.0 * se, "k={k}: {got} vs {expect}");
        }
    }

    #[test]
    fn normal_moments() {
        let mut r = SplitMix::new(11);
        let xs: Vec<f64> = (0..200_000).map(|_| r.normal()).collect();
        let (m, v) = moments(&xs);
        assert!(m.abs() < 0.01);
        assert!((v - 1.0).abs() < 0.02);
    }
}
