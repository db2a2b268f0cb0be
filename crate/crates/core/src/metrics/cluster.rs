//! Seeded k-means over per-pixel spectra.

use std::collections::HashSet;

use crate::cube::HsiCube;
use crate::error::Result;
use crate::metrics::MetricConfig;
use crate::rng::{salt, SplitMix};

pub const KMEANS_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Cluster index per pixel, row-major.
    pub labels: Vec<usize>,
    /// `k` centroids of `bands` samples each, row-major.
    pub centroids: Vec<f64>,
    pub bands: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.centroids.len() / self.bands
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.bands..(i + 1) * self.bands]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k()];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means with k-means++ seeding. `k` is clamped to the number of distinct
/// spectra; Lloyd iterations stop at an assignment fixpoint or after
/// [`KMEANS_MAX_ITERATIONS`].
pub fn cluster_spectra(gt: &HsiCube, cfg: &MetricConfig) -> Result<ClusterAssignment> {
    cfg.validate()?;
    let n = gt.pixels();
    let bands = gt.bands();
    let mut points = vec![0.0; n * bands];
    for b in 0..bands {
        for (p, &v) in gt.band(b).iter().enumerate() {
            points[p * bands + b] = v;
        }
    }
    let point = |p: usize| &points[p * bands..(p + 1) * bands];

    let distinct: HashSet<Vec<u64>> = (0..n)
        .map(|p| point(p).iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    let k = cfg.cluster_count.min(distinct.len());

    // k-means++ seeding.
    let mut rng = SplitMix::for_site(cfg.cluster_seed, salt::KMEANS, 0);
    let first = rng.below(n as u64) as usize;
    let mut centroids: Vec<f64> = point(first).to_vec();
    let mut d2: Vec<f64> = (0..n).map(|p| dist2(point(p), point(first))).collect();
    while centroids.len() / bands < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let target = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (p, &d) in d2.iter().enumerate() {
            if d > 0.0 {
                chosen = Some(p);
                acc += d;
                if acc > target {
                    break;
                }
            }
        }
        let c = chosen.expect("total > 0 implies a positive distance");
        centroids.extend_from_slice(point(c));
        for (p, d) in d2.iter_mut().enumerate() {
            *d = d.min(dist2(point(p), point(c)));
        }
    }
    let k = centroids.len() / bands;

    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < KMEANS_MAX_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        for (p, label) in labels.iter_mut().enumerate() {
            let x = point(p);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = dist2(x, &centroids[c * bands..(c + 1) * bands]);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
        let mut sums = vec![0.0; k * bands];
        let mut counts = vec![0usize; k];
        for (p, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, v) in sums[l * bands..(l + 1) * bands].iter_mut().zip(point(p)) {
                *s += v;
            }
        }
        for c in 0..k {
            // An empty cluster keeps its previous centroid.
            if counts[c] > 0 {
                for b in 0..bands {
                    centroids[c * bands + b] = sums[c * bands + b] / counts[c] as f64;
                }
            }
        }
    }

    Ok(ClusterAssignment {
        labels,
        centroids,
        bands,
        iterations,
        converged,
    })
}
