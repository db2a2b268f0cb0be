//! `synth` and `simulate`: producing cubes and camera images.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use specbench::camera::simulate_real_world_jpeg;
use specbench::io::bhsc::{encode_cube, encode_rgb};
use specbench::io::manifest::{write_manifest, Manifest, SceneRecord, OUT_OF_SCOPE_TAG};
use specbench::robustness::Track;
use specbench::synth::{synth_scene, SynthConfig};
use specbench::WavelengthGrid;

use crate::config::{sha256_hex, Overrides, Provenance, Setup};
use crate::scenes::{check_id, create_dir, grid_of, load_scenes, open_manifest, report_failures, white_cubes, write_json, TRAIN_TAG};
use crate::{usage, Status};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of scenes.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 32)]
    pub height: usize,
    #[arg(long, default_value_t = 32)]
    pub width: usize,
    /// Distinct materials per scene.
    #[arg(long, default_value_t = 6)]
    pub materials: usize,
    /// Relative per-pixel texture amplitude.
    #[arg(long, default_value_t = 0.05)]
    pub texture: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mix all materials from this many spectra shared by every scene
    /// (0: independent materials).
    #[arg(long, default_value_t = 0)]
    pub shared_spectra: usize,
    #[arg(long, default_value_t = 31)]
    pub bands: usize,
    #[arg(long, default_value_t = 400.0)]
    pub start_nm: f64,
    #[arg(long, default_value_t = 10.0)]
    pub step_nm: f64,
    /// Tag the first N scenes `train` and the rest `test`.
    #[arg(long)]
    pub train: Option<usize>,
    /// Tag the last N scenes `out_of_scope`.
    #[arg(long, default_value_t = 0)]
    pub out_of_scope: usize,
}

pub fn synth(args: &SynthArgs, o: &Overrides) -> Result<Status> {
    let cfg = o.resolve()?;
    let out = create_dir(cfg.output_dir()?)?;
    let grid = WavelengthGrid::new(args.start_nm, args.step_nm, args.bands).map_err(|e| usage(e.to_string()))?;
    let sc = SynthConfig {
        height: args.height,
        width: args.width,
        materials: args.materials,
        texture: args.texture,
        seed: args.seed,
        shared_spectra: args.shared_spectra,
    };
    if args.out_of_scope > args.count || args.train.is_some_and(|t| t > args.count) {
        return Err(usage("tagged scene counts exceed --count"));
    }
    let records = (0..args.count)
        .into_par_iter()
        .map(|i| {
            let id = format!("scene_{i:03}");
            let cube = synth_scene(&sc, grid, i as u64).map_err(|e| usage(e.to_string()))?;
            let file = format!("{id}.bhsc");
            std::fs::write(out.join(&file), encode_cube(&cube)?)?;
            let mut tags = Vec::new();
            if let Some(t) = args.train {
                tags.push(if i < t { TRAIN_TAG } else { "test" });
            }
            if i >= args.count - args.out_of_scope {
                tags.push(OUT_OF_SCOPE_TAG);
            }
            Ok(SceneRecord::new(id, file).with_tags(tags))
        })
        .collect::<Result<Vec<_>>>()?;
    write_manifest(
        &Manifest {
            records,
            root: out.clone(),
        },
        out.join("manifest.jsonl"),
    )?;
    println!("wrote {} scenes to {}", args.count, out.display());
    Ok(Status::Ok)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene manifest (JSON lines).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write both tracks instead of the configured one.
    #[arg(long)]
    pub all_tracks: bool,
}

#[derive(Debug, Serialize)]
struct WrittenFile {
    file: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct SimulatedScene {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    clean: Option<WrittenFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    real_world: Option<WrittenFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct SimulateSidecar<'a> {
    config_hash: String,
    provenance: &'a Provenance,
    tracks: Vec<&'static str>,
    scenes: Vec<SimulatedScene>,
}

pub fn simulate(args: &SimulateArgs, o: &Overrides) -> Result<Status> {
    let cfg = o.resolve()?;
    let out = create_dir(cfg.output_dir()?)?;
    let m = open_manifest(&args.manifest)?;
    let scenes = load_scenes(&m, None);
    let tracks = if args.all_tracks {
        vec![Track::Clean, Track::RealWorld]
    } else {
        vec![cfg.track]
    };
    let setup = Setup::new(cfg, grid_of(&scenes), white_cubes(&scenes))?;
    let tc = &setup.track;
    let hash = setup.provenance.hash();

    let results: Vec<(SimulatedScene, SceneRecord)> = scenes
        .par_iter()
        .map(|scene| {
            let id = scene.id().to_string();
            let mut done = SimulatedScene {
                id: id.clone(),
                clean: None,
                real_world: None,
                noise_seed: None,
                error: None,
            };
            let mut record = SceneRecord {
                id: id.clone(),
                cube_path: m.cube_path(&scene.record).map(|p| std::fs::canonicalize(&p).unwrap_or(p)),
                rgb_clean_path: None,
                rgb_real_path: None,
                tags: scene.record.tags.clone(),
            };
            let written = check_id(&id).and_then(|_| {
                let cube = scene.cube.as_ref().map_err(Clone::clone)?;
                for &t in &tracks {
                    let (file, bytes) = match t {
                        Track::Clean => {
                            let rgb = tc.render(cube, &id).map_err(|e| e.to_string())?;
                            (format!("{id}.clean.brgb"), encode_rgb(&rgb).map_err(|e| e.to_string())?)
                        }
                        Track::RealWorld => {
                            let noise = tc.scene_noise(&id);
                            let mut jpeg = tc.jpeg.clone();
                            jpeg.provenance = Some(
                                format!("specbench config_hash={hash} scene={id} noise_seed={}", noise.seed).into_bytes(),
                            );
                            done.noise_seed = Some(noise.seed);
                            let bytes = simulate_real_world_jpeg(cube, &tc.css, &noise, &jpeg, tc.white_level)
                                .map_err(|e| e.to_string())?;
                            (format!("{id}.real.jpg"), bytes)
                        }
                    };
                    std::fs::write(out.join(&file), &bytes).map_err(|e| format!("{file}: {e}"))?;
                    let entry = WrittenFile {
                        file: file.clone(),
                        sha256: sha256_hex(&bytes),
                    };
                    match t {
                        Track::Clean => {
                            done.clean = Some(entry);
                            record.rgb_clean_path = Some(file.into());
                        }
                        Track::RealWorld => {
                            done.real_world = Some(entry);
                            record.rgb_real_path = Some(file.into());
                        }
                    }
                }
                Ok(())
            });
            done.error = written.err();
            (done, record)
        })
        .collect();

    let failed = report_failures(
        "simulate",
        results.iter().filter_map(|(s, _)| Some((s.id.as_str(), s.error.as_deref()?))),
    );
    let (done, records): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    write_manifest(
        &Manifest {
            records,
            root: out.clone(),
        },
        out.join("manifest.jsonl"),
    )?;
    write_json(
        &out.join("simulate.json"),
        &SimulateSidecar {
            config_hash: hash,
            provenance: &setup.provenance,
            tracks: tracks.iter().map(|t| t.name()).collect(),
            scenes: done,
        },
    )?;
    println!(
        "simulated {} of {} scenes into {}",
        scenes.len() - failed,
        scenes.len(),
        out.display()
    );
    Ok(if failed > 0 { Status::Partial } else { Status::Ok })
}
