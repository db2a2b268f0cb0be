//! Run configuration: TOML file values, then command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use specbench::camera::{white_level_percentile, NoiseParams};
use specbench::io::{read_css, write_css_string, ChromaSubsampling, JpegSettings};
use specbench::metrics::MetricConfig;
use specbench::robustness::{ShuffleSpec, SuiteConfig, Track, TrackConfig, DEFAULT_PATCH};
use specbench::{CameraResponse, HsiCube, WavelengthGrid};

use crate::usage;

pub const DEFAULT_PERCENTILE: f64 = 99.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JpegConfig {
    pub quality: u32,
    pub subsampling: ChromaSubsampling,
}

impl Default for JpegConfig {
    fn default() -> Self {
        let d = JpegSettings::default();
        JpegConfig {
            quality: d.quality,
            subsampling: d.subsampling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShuffleConfig {
    pub patch: usize,
    pub seed: u64,
}

impl Default for ShuffleConfig {
    fn default() -> Self {
        ShuffleConfig {
            patch: DEFAULT_PATCH,
            seed: 0,
        }
    }
}

/// Contents of a `--config` file. Relative paths are taken relative to the
/// file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub track: Track,
    /// Camera response CSV; the built-in response when absent.
    pub css_path: Option<PathBuf>,
    /// Clean-RGB value mapped to full scale. Derived from the training
    /// scenes when absent.
    pub white_level: Option<f64>,
    pub white_level_percentile: f64,
    pub noise: NoiseParams,
    pub jpeg: JpegConfig,
    pub metrics: MetricConfig,
    pub shuffle: ShuffleConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            track: Track::Clean,
            css_path: None,
            white_level: None,
            white_level_percentile: DEFAULT_PERCENTILE,
            noise: NoiseParams::default(),
            jpeg: JpegConfig::default(),
            metrics: MetricConfig::default(),
            shuffle: ShuffleConfig::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.css_path, &mut cfg.output_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |r: specbench::Result<()>| r.map_err(|e| usage(e.to_string()));
        check(self.noise.validate())?;
        check(self.metrics.validate())?;
        check(self.jpeg_settings().validate())?;
        if !(0.0..=100.0).contains(&self.white_level_percentile) {
            return Err(usage(format!(
                "white_level_percentile must be in [0, 100], got {}",
                self.white_level_percentile
            )));
        }
        if let Some(w) = self.white_level {
            if !(w.is_finite() && w > 0.0) {
                return Err(usage(format!("white_level must be positive, got {w}")));
            }
        }
        if self.shuffle.patch == 0 {
            return Err(usage("shuffle patch must be positive"));
        }
        if let Some(p) = &self.css_path {
            if !p.is_file() {
                return Err(usage(format!("css_path {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn jpeg_settings(&self) -> JpegSettings {
        JpegSettings {
            quality: self.jpeg.quality,
            subsampling: self.jpeg.subsampling,
            provenance: None,
        }
    }

    pub fn output_dir(&self) -> Result<&Path> {
        self.output_dir
            .as_deref()
            .ok_or_else(|| usage("no output directory; pass --output-dir or set output_dir"))
    }
}

// Flags that override config-file values.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true, env = "SPECBENCH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Evaluation track: clean or real_world.
    #[arg(long, global = true)]
    pub track: Option<Track>,
    /// Camera response CSV (wavelength,r,g,b).
    #[arg(long, global = true)]
    pub css: Option<PathBuf>,
    #[arg(long, global = true)]
    pub white_level: Option<f64>,
    #[arg(long, global = true)]
    pub noise_seed: Option<u64>,
    #[arg(long, global = true)]
    pub photon_gain: Option<f64>,
    #[arg(long, global = true)]
    pub dark_sigma: Option<f64>,
    #[arg(long, global = true)]
    pub jpeg_quality: Option<u32>,
    #[arg(long, global = true)]
    pub shuffle_seed: Option<u64>,
    #[arg(long, global = true)]
    pub cluster_seed: Option<u64>,
    #[arg(short, long, global = true)]
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    /// Config file (if any) with flags applied, validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(t) = self.track {
            cfg.track = t;
        }
        if let Some(p) = &self.css {
            cfg.css_path = Some(p.clone());
        }
        if let Some(w) = self.white_level {
            cfg.white_level = Some(w);
        }
        if let Some(s) = self.noise_seed {
            cfg.noise.seed = s;
        }
        if let Some(g) = self.photon_gain {
            cfg.noise.photon_gain = g;
        }
        if let Some(d) = self.dark_sigma {
            cfg.noise.dark_sigma = d;
        }
        if let Some(q) = self.jpeg_quality {
            cfg.jpeg.quality = q;
        }
        if let Some(s) = self.shuffle_seed {
            cfg.shuffle.seed = s;
        }
        if let Some(s) = self.cluster_seed {
            cfg.metrics.cluster_seed = s;
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The semantic parameters of a run. Its hash identifies outputs; paths are
/// left out so moving data does not change it.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub track: Track,
    pub css_sha256: String,
    pub white_level: f64,
    pub noise: NoiseParams,
    pub jpeg: JpegConfig,
    pub metrics: MetricConfig,
    pub shuffle: ShuffleConfig,
}

impl Provenance {
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("provenance serializes");
        hex::encode(Sha256::digest(json))
    }

    /// `key=value` lines for CSV comments and report headers.
    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("config_hash={}", self.hash()),
            format!("track={}", self.track.name()),
            format!("white_level={}", self.white_level),
            format!("noise_seed={}", self.noise.seed),
            format!("shuffle_seed={}", self.shuffle.seed),
            format!("cluster_seed={}", self.metrics.cluster_seed),
        ]
    }
}

/// A resolved run: camera response, white level and everything derived.
pub struct Setup {
    pub cfg: RunConfig,
    pub track: TrackConfig,
    pub provenance: Provenance,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Setup {
    /// `white_cubes` feed the white-level percentile when none is configured.
    pub fn new<'a>(
        cfg: RunConfig,
        grid: WavelengthGrid,
        white_cubes: impl IntoIterator<Item = &'a HsiCube>,
    ) -> Result<Setup> {
        let css = match &cfg.css_path {
            Some(p) => {
                let css = read_css(p).map_err(|e| usage(e.to_string()))?;
                if *css.grid() != grid {
                    return Err(usage(format!(
                        "{}: camera response grid does not match the cubes ({} bands from {} nm)",
                        p.display(),
                        grid.bands,
                        grid.start_nm
                    )));
                }
                css
            }
            None => CameraResponse::default_for(grid)?,
        };
        let white_level = match cfg.white_level {
            Some(w) => w,
            None => white_level_percentile(white_cubes, &css, cfg.white_level_percentile)
                .context("deriving the white level")?,
        };
        let provenance = Provenance {
            track: cfg.track,
            css_sha256: sha256_hex(write_css_string(&css).as_bytes()),
            white_level,
            noise: cfg.noise,
            jpeg: cfg.jpeg,
            metrics: cfg.metrics,
            shuffle: cfg.shuffle,
        };
        let track = TrackConfig {
            track: cfg.track,
            css,
            noise: cfg.noise,
            jpeg: cfg.jpeg_settings(),
            white_level,
        };
        Ok(Setup {
            cfg,
            track,
            provenance,
        })
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            track: self.track.clone(),
            metric: self.cfg.metrics,
            shuffle: ShuffleSpec::new(self.cfg.shuffle.patch, self.cfg.shuffle.seed),
        }
    }
}
