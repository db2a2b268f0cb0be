//! The auxiliary evaluation suite: out-of-scope subset, spatial shuffle,
//! brightness modulation, physical consistency and cluster-weighted MRAE.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::camera::{project_clean, simulate_clean, simulate_real_world, NoiseParams};
use crate::css::CameraResponse;
use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::io::codec::JpegSettings;
use crate::io::manifest::{Manifest, OUT_OF_SCOPE_TAG};
use crate::metrics::{mrae, rgb_mrae, weighted_mrae, MetricConfig};
use crate::recon::{pseudoinverse_estimate, Model};
use crate::rgb::{Rgb8Image, RgbImage};
use crate::rng::scene_seed;
use crate::robustness::shuffle::{Shuffle, ShuffleSpec};
use crate::robustness::brightness_variants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Clean,
    RealWorld,
}

impl Track {
    pub fn name(self) -> &'static str {
        match self {
            Track::Clean => "clean",
            Track::RealWorld => "real_world",
        }
    }
}

impl std::str::FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" => Ok(Track::Clean),
            "real_world" | "real-world" => Ok(Track::RealWorld),
            other => Err(Error::invalid(format!("unknown track `{other}`"))),
        }
    }
}

/// Everything needed to turn a cube into a track's reconstructor input.
#[derive(Debug, Clone)]
pub struct TrackConfig {
    pub track: Track,
    pub css: CameraResponse,
    /// Noise seed is combined with each scene id, see [`scene_seed`].
    pub noise: NoiseParams,
    pub jpeg: JpegSettings,
    pub white_level: f64,
}

impl TrackConfig {
    pub fn clean(css: CameraResponse, white_level: f64) -> Self {
        TrackConfig {
            track: Track::Clean,
            css,
            noise: NoiseParams::NONE,
            jpeg: JpegSettings::default(),
            white_level,
        }
    }

    pub fn scene_noise(&self, scene_id: &str) -> NoiseParams {
        NoiseParams {
            seed: scene_seed(self.noise.seed, scene_id),
            ..self.noise
        }
    }

    /// The decoded 8-bit image of the real-world pipeline.
    pub fn render_real_world(&self, cube: &HsiCube, scene_id: &str) -> Result<Rgb8Image> {
        simulate_real_world(cube, &self.css, &self.scene_noise(scene_id), &self.jpeg, self.white_level)
    }

    /// Reconstructor input: linear RGB on the clean track, decoded codes
    /// divided by 255 on the real-world track.
    pub fn render(&self, cube: &HsiCube, scene_id: &str) -> Result<RgbImage> {
        match self.track {
            Track::Clean => simulate_clean(cube, &self.css, self.white_level),
            Track::RealWorld => Ok(self.render_real_world(cube, scene_id)?.normalized()),
        }
    }

    /// RGB re-rendered from a reconstruction, in the same units as
    /// [`TrackConfig::render`].
    pub fn regenerate(&self, rec: &HsiCube) -> Result<RgbImage> {
        let rgb = project_clean(rec, &self.css)?;
        Ok(match self.track {
            Track::Clean => rgb,
            Track::RealWorld => rgb.map(|v| v / self.white_level),
        })
    }
}

/// A spectral reconstruction method. Inputs are in the units produced by
/// [`TrackConfig::render`].
pub trait Reconstructor: Sync {
    fn reconstruct(&self, input: &RgbImage) -> Result<HsiCube>;
}

impl Reconstructor for Model {
    fn reconstruct(&self, input: &RgbImage) -> Result<HsiCube> {
        Ok(self.predict(input))
    }
}

impl<F> Reconstructor for F
where
    F: Fn(&RgbImage) -> Result<HsiCube> + Sync,
{
    fn reconstruct(&self, input: &RgbImage) -> Result<HsiCube> {
        self(input)
    }
}

/// Minimum-norm inverse of the camera response. `input_scale` maps track
/// inputs back to linear units (the white level on the real-world track).
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub css: CameraResponse,
    pub input_scale: f64,
}

impl PseudoInverse {
    pub fn for_track(cfg: &TrackConfig) -> Self {
        PseudoInverse {
            css: cfg.css.clone(),
            input_scale: match cfg.track {
                Track::Clean => 1.0,
                Track::RealWorld => cfg.white_level,
            },
        }
    }
}

impl Reconstructor for PseudoInverse {
    fn reconstruct(&self, input: &RgbImage) -> Result<HsiCube> {
        if self.input_scale == 1.0 {
            pseudoinverse_estimate(&self.css, input)
        } else {
            pseudoinverse_estimate(&self.css, &input.scale(self.input_scale))
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub track: TrackConfig,
    pub metric: MetricConfig,
    /// Patch size and base seed; each scene's permutation seed is derived
    /// from this seed and the scene id.
    pub shuffle: ShuffleSpec,
}

#[derive(Debug, Clone)]
pub struct AuxScene {
    pub id: String,
    pub cube: HsiCube,
    pub out_of_scope: bool,
}

pub const AUX_COLUMNS: [&str; 7] = [
    "baseline",
    "out_of_scope",
    "spatial",
    "brightness_x0.5",
    "brightness_x2",
    "physical",
    "weighted",
];

pub const AUX_HEADINGS: [&str; 7] = [
    "Baseline",
    "Out-of-Scope",
    "Spatial",
    "Brightness×0.5",
    "Brightness×2",
    "Physical",
    "Weighted",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AuxRow {
    pub id: String,
    /// In [`AUX_COLUMNS`] order. `out_of_scope` is filled only for tagged
    /// scenes.
    pub cells: [Option<f64>; 7],
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxReport {
    pub track: Track,
    pub rows: Vec<AuxRow>,
}

fn run_checked(recon: &dyn Reconstructor, input: &RgbImage, like: &HsiCube) -> Result<HsiCube> {
    let rec = recon.reconstruct(input)?;
    if !rec.same_shape(like) {
        return Err(Error::invalid(format!(
            "reconstruction is {}x{}x{}, expected {}x{}x{}",
            rec.height(),
            rec.width(),
            rec.bands(),
            like.height(),
            like.width(),
            like.bands()
        )));
    }
    Ok(rec)
}

fn scene_cells(scene: &AuxScene, recon: &dyn Reconstructor, cfg: &SuiteConfig) -> Result<[Option<f64>; 7]> {
    let tc = &cfg.track;
    let m = &cfg.metric;
    let cube = &scene.cube;

    let input = tc.render(cube, &scene.id)?;
    let rec = run_checked(recon, &input, cube)?;
    let baseline = mrae(cube, &rec, m)?;

    let spec = ShuffleSpec {
        seed: scene_seed(cfg.shuffle.seed, &scene.id),
        ..cfg.shuffle.clone()
    };
    let (gt_s, spec) = cube.shuffle_patches(&spec)?;
    let (in_s, _) = input.shuffle_patches(&spec)?;
    let spatial = mrae(&gt_s, &run_checked(recon, &in_s, &gt_s)?, m)?;

    let (half, double) = brightness_variants(cube)?;
    let mut bright = [0.0; 2];
    for (slot, variant) in bright.iter_mut().zip([&half, &double]) {
        let v_in = tc.render(variant, &scene.id)?;
        *slot = mrae(variant, &run_checked(recon, &v_in, variant)?, m)?;
    }

    let physical = rgb_mrae(&input, &tc.regenerate(&rec)?, m)?;
    let weighted = weighted_mrae(cube, &rec, m)?;

    Ok([
        Some(baseline),
        scene.out_of_scope.then_some(baseline),
        Some(spatial),
        Some(bright[0]),
        Some(bright[1]),
        Some(physical),
        Some(weighted),
    ])
}

/// One scene's row. Failures are recorded in the row, never propagated.
pub fn run_aux_scene(scene: &AuxScene, recon: &dyn Reconstructor, cfg: &SuiteConfig) -> AuxRow {
    match scene_cells(scene, recon, cfg) {
        Ok(cells) => AuxRow {
            id: scene.id.clone(),
            cells,
            error: None,
        },
        Err(e) => AuxRow {
            id: scene.id.clone(),
            cells: [None; 7],
            error: Some(e.to_string()),
        },
    }
}

/// Runs every scene in order.
pub fn run_aux_suite(scenes: &[AuxScene], recon: &dyn Reconstructor, cfg: &SuiteConfig) -> AuxReport {
    AuxReport {
        track: cfg.track.track,
        rows: scenes.iter().map(|s| run_aux_scene(s, recon, cfg)).collect(),
    }
}

/// Loads each manifest cube and runs the suite. Scenes whose cube is missing
/// or unreadable get an error row.
pub fn run_aux_suite_manifest(manifest: &Manifest, recon: &dyn Reconstructor, cfg: &SuiteConfig) -> AuxReport {
    let rows = manifest
        .iter()
        .map(|rec| {
            let loaded = manifest
                .cube_path(rec)
                .ok_or_else(|| Error::invalid("scene has no cube_path"))
                .and_then(crate::io::bhsc::read_cube);
            match loaded {
                Ok(cube) => run_aux_scene(
                    &AuxScene {
                        id: rec.id.clone(),
                        cube,
                        out_of_scope: rec.has_tag(OUT_OF_SCOPE_TAG),
                    },
                    recon,
                    cfg,
                ),
                Err(e) => AuxRow {
                    id: rec.id.clone(),
                    cells: [None; 7],
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    AuxReport {
        track: cfg.track.track,
        rows,
    }
}

impl AuxReport {
    /// Mean of each column over the rows where it is populated.
    pub fn column_means(&self) -> [Option<f64>; 7] {
        let mut out = [None; 7];
        for (j, slot) in out.iter_mut().enumerate() {
            let vals: Vec<f64> = self.rows.iter().filter_map(|r| r.cells[j]).collect();
            if !vals.is_empty() {
                *slot = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
        out
    }

    pub fn failed(&self) -> impl Iterator<Item = &AuxRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    /// One line per scene, values at full precision. `comment` lines come
    /// first, each prefixed with `# `.
    pub fn to_csv(&self, comment: &[String]) -> String {
        let mut out = String::new();
        for c in comment {
            let _ = writeln!(out, "# {c}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["track", "scene"];
        header.extend(AUX_COLUMNS);
        header.push("error");
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![self.track.name().to_string(), r.id.clone()];
            rec.extend(r.cells.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec).expect("in-memory write");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    /// Inverse of [`AuxReport::to_csv`]; `#` lines are skipped.
    pub fn from_csv(text: &str) -> Result<AuxReport> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::format("header", e.to_string()))?
            .clone();
        let mut expected = vec!["track", "scene"];
        expected.extend(AUX_COLUMNS);
        expected.push("error");
        if header.iter().ne(expected.iter().copied()) {
            return Err(Error::format("header", "not an auxiliary report"));
        }
        let mut track = None;
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let field = format!("row {}", i + 1);
            let rec = rec.map_err(|e| Error::format(&field, e.to_string()))?;
            let t: Track = rec[0].parse().map_err(|e: Error| Error::format(&field, e.to_string()))?;
            if *track.get_or_insert(t) != t {
                return Err(Error::format(&field, "mixed tracks in one report"));
            }
            let mut cells = [None; 7];
            for (j, cell) in cells.iter_mut().enumerate() {
                let v = &rec[2 + j];
                if !v.is_empty() {
                    *cell = Some(v.parse::<f64>().map_err(|_| {
                        Error::format(format!("{field} column {}", AUX_COLUMNS[j]), format!("not a number: `{v}`"))
                    })?);
                }
            }
            let err = &rec[9];
            rows.push(AuxRow {
                id: rec[1].to_string(),
                cells,
                error: (!err.is_empty()).then(|| err.to_string()),
            });
        }
        Ok(AuxReport {
            track: track.ok_or_else(|| Error::format("rows", "report has no rows"))?,
            rows,
        })
    }

    /// Column means as an aligned table in the auxiliary column order.
    pub fn to_text(&self) -> String {
        crate::report::aux_text(&[("", self)])
    }
}
