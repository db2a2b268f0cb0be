//! Manifest scenes and the per-scene plumbing shared by the subcommands.

use std::path::{Path, PathBuf};

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use specbench::io::bhsc::{read_cube, read_rgb};
use specbench::io::manifest::{load_manifest_unchecked, Manifest, SceneRecord};
use specbench::io::read_rgb8;
use specbench::robustness::{Track, TrackConfig};
use specbench::{HsiCube, RgbImage, WavelengthGrid};

use crate::usage;

pub const TRAIN_TAG: &str = "train";

pub struct Scene {
    pub record: SceneRecord,
    pub cube: std::result::Result<HsiCube, String>,
}

impl Scene {
    pub fn id(&self) -> &str {
        &self.record.id
    }
}

pub fn open_manifest(path: &Path) -> Result<Manifest> {
    load_manifest_unchecked(path).map_err(|e| usage(e.to_string()))
}

/// Loads every cube in manifest order; failures stay attached to the scene.
pub fn load_scenes(m: &Manifest, tag: Option<&str>) -> Vec<Scene> {
    m.records
        .par_iter()
        .filter(|r| tag.is_none_or(|t| r.has_tag(t)))
        .map(|r| Scene {
            record: r.clone(),
            cube: match m.cube_path(r) {
                Some(p) => read_cube(p).map_err(|e| e.to_string()),
                None => Err("scene has no cube_path".into()),
            },
        })
        .collect()
}

/// Grid of the first readable cube.
pub fn grid_of(scenes: &[Scene]) -> WavelengthGrid {
    scenes
        .iter()
        .find_map(|s| s.cube.as_ref().ok().map(|c| *c.grid()))
        .unwrap_or_default()
}

/// Cubes that set the default white level: those tagged `train`, or all of
/// them when nothing is tagged.
pub fn white_cubes(scenes: &[Scene]) -> Vec<&HsiCube> {
    let any_train = scenes.iter().any(|s| s.record.has_tag(TRAIN_TAG));
    scenes
        .iter()
        .filter(|s| !any_train || s.record.has_tag(TRAIN_TAG))
        .filter_map(|s| s.cube.as_ref().ok())
        .collect()
}

/// Scene ids double as file stems.
pub fn check_id(id: &str) -> std::result::Result<(), String> {
    if id.is_empty() || id == "." || id == ".." || id.contains(['/', '\\', '\0']) {
        Err(format!("scene id `{id}` cannot be used as a file name"))
    } else {
        Ok(())
    }
}

/// Reconstructor input for a scene: the manifest's RGB file for the track
/// when present, otherwise rendered from the cube.
pub fn track_input(m: &Manifest, scene: &Scene, tc: &TrackConfig) -> std::result::Result<RgbImage, String> {
    let r = &scene.record;
    let stored = match tc.track {
        Track::Clean => r.rgb_clean_path.as_ref(),
        Track::RealWorld => r.rgb_real_path.as_ref(),
    };
    match (stored, &scene.cube) {
        (Some(p), _) => {
            let p = m.resolve(p);
            match tc.track {
                Track::Clean => read_rgb(&p),
                Track::RealWorld => read_rgb8(&p).map(|img| img.normalized()),
            }
            .map_err(|e| e.to_string())
        }
        (None, Ok(cube)) => tc.render(cube, &r.id).map_err(|e| e.to_string()),
        (None, Err(e)) => Err(e.clone()),
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// Prints per-scene failures to stderr; returns how many there were.
pub fn report_failures<'a>(what: &str, failures: impl IntoIterator<Item = (&'a str, &'a str)>) -> usize {
    let mut n = 0;
    for (id, err) in failures {
        eprintln!("{what}: scene {id}: {err}");
        n += 1;
    }
    n
}
