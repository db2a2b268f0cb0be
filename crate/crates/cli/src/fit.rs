//! `fit` and `reconstruct`.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use specbench::io::bhsc::encode_cube;
use specbench::metrics::mrae;
use specbench::recon::{
    encode_model, fit_basis, fit_linear, read_model, FeatureOrder, Model, Objective, DEFAULT_BASIS_COUNT,
    DEFAULT_LAMBDA,
};
use specbench::robustness::{PseudoInverse, Reconstructor};
use specbench::{HsiCube, RgbImage};

use crate::config::{sha256_hex, Overrides, Provenance, Setup};
use crate::scenes::{
    check_id, create_dir, grid_of, load_scenes, open_manifest, report_failures, track_input, white_cubes,
    write_json, TRAIN_TAG,
};
use crate::{usage, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Plain,
    CssPrior,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub kind: ModelKind,
    /// Polynomial feature order (1 or 2).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    /// Ridge weight.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Basis size (basis models).
    #[arg(short, long, default_value_t = DEFAULT_BASIS_COUNT)]
    pub k: usize,
    /// Alternating iterations (basis models).
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = ObjectiveKind::Plain)]
    pub objective: ObjectiveKind,
    /// Weight of the camera-response term for `--objective css-prior`.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Train on scenes with this tag. Defaults to `train` when any scene
    /// carries it, else every scene.
    #[arg(long)]
    pub tag: Option<String>,
    /// Model file; defaults to `model.sbmd` in the output directory.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FitSidecar<'a> {
    config_hash: String,
    provenance: &'a Provenance,
    kind: ModelKind,
    order: u8,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<ObjectiveKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    model_sha256: String,
    training_scenes: Vec<String>,
    training_mrae: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    objective_trace: Vec<f64>,
}

fn training_tag(args_tag: Option<&str>, m: &specbench::io::Manifest) -> Option<String> {
    match args_tag {
        Some(t) => Some(t.to_string()),
        None => m.iter().any(|r| r.has_tag(TRAIN_TAG)).then(|| TRAIN_TAG.to_string()),
    }
}

pub fn fit(args: &FitArgs, o: &Overrides) -> Result<Status> {
    let cfg = o.resolve()?;
    let model_path = match &args.model_out {
        Some(p) => p.clone(),
        None => create_dir(cfg.output_dir()?)?.join("model.sbmd"),
    };
    let m = open_manifest(&args.manifest)?;
    let tag = training_tag(args.tag.as_deref(), &m);
    let all = load_scenes(&m, None);
    let setup = Setup::new(cfg, grid_of(&all), white_cubes(&all))?;
    let scenes: Vec<_> = all
        .iter()
        .filter(|s| tag.as_deref().is_none_or(|t| s.record.has_tag(t)))
        .collect();
    if scenes.is_empty() {
        return Err(usage("no training scenes in the manifest"));
    }
    let order = FeatureOrder::from_order(args.order)?;

    let loaded: Vec<(String, std::result::Result<(RgbImage, HsiCube), String>)> = scenes
        .par_iter()
        .map(|s| {
            let pair = track_input(&m, s, &setup.track).and_then(|rgb| Ok((rgb, s.cube.clone()?)));
            (s.id().to_string(), pair)
        })
        .collect();
    let failed = report_failures(
        "fit",
        loaded.iter().filter_map(|(id, r)| Some((id.as_str(), r.as_ref().err()?.as_str()))),
    );
    let (ids, pairs): (Vec<String>, Vec<(RgbImage, HsiCube)>) =
        loaded.into_iter().filter_map(|(id, r)| Some((id, r.ok()?))).unzip();
    if pairs.is_empty() {
        bail!("no usable training pairs");
    }

    let (model, trace) = match args.kind {
        ModelKind::Linear => (Model::Linear(fit_linear(&pairs, order, args.lambda)?), Vec::new()),
        ModelKind::Basis => {
            let objective = match args.objective {
                ObjectiveKind::Plain => Objective::Plain,
                ObjectiveKind::CssPrior => Objective::CssPrior {
                    css: setup.track.css.clone(),
                    tau: args.tau,
                },
            };
            let f = fit_basis(&pairs, order, args.k, args.lambda, args.iterations, &objective)?;
            (Model::Basis(f.model), f.trace)
        }
    };
    let scores = pairs
        .par_iter()
        .map(|(rgb, cube)| mrae(cube, &model.predict(rgb), &setup.cfg.metrics))
        .collect::<specbench::Result<Vec<f64>>>()?;
    let training_mrae = scores.iter().sum::<f64>() / scores.len() as f64;

    let bytes = encode_model(&model);
    std::fs::write(&model_path, &bytes).map_err(|e| anyhow::anyhow!("{}: {e}", model_path.display()))?;
    let basis = args.kind == ModelKind::Basis;
    let mut sidecar = model_path.clone().into_os_string();
    sidecar.push(".json");
    write_json(
        &PathBuf::from(sidecar),
        &FitSidecar {
            config_hash: setup.provenance.hash(),
            provenance: &setup.provenance,
            kind: args.kind,
            order: args.order,
            lambda: args.lambda,
            k: basis.then_some(args.k),
            iterations: basis.then_some(args.iterations),
            objective: basis.then_some(args.objective),
            tau: (basis && args.objective == ObjectiveKind::CssPrior).then_some(args.tau),
            model_sha256: sha256_hex(&bytes),
            training_scenes: ids,
            training_mrae,
            objective_trace: trace,
        },
    )?;
    println!("training MRAE: {training_mrae}");
    println!("model written to {}", model_path.display());
    Ok(if failed > 0 { Status::Partial } else { Status::Ok })
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Fitted model file.
    #[arg(long, conflicts_with = "method", required_unless_present = "method")]
    pub model: Option<PathBuf>,
    /// Built-in method instead of a model: `pseudoinverse`.
    #[arg(long)]
    pub method: Option<String>,
    /// Only scenes with this tag.
    #[arg(long)]
    pub tag: Option<String>,
}

/// `pseudoinverse` or a model file path.
pub fn reconstructor(spec: &str, setup: &Setup) -> Result<Box<dyn Reconstructor>> {
    if spec == "pseudoinverse" {
        return Ok(Box::new(PseudoInverse::for_track(&setup.track)));
    }
    let model = read_model(spec).map_err(|e| usage(format!("method `{spec}`: {e}")))?;
    if model.grid() != setup.track.css.grid() {
        return Err(usage(format!("model {spec} was fitted on a different wavelength grid")));
    }
    Ok(Box::new(model))
}

#[derive(Serialize)]
struct ReconstructedScene {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ReconstructSidecar<'a> {
    config_hash: String,
    provenance: &'a Provenance,
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_sha256: Option<String>,
    scenes: Vec<ReconstructedScene>,
}

pub fn reconstruct(args: &ReconstructArgs, o: &Overrides) -> Result<Status> {
    let cfg = o.resolve()?;
    let out = create_dir(cfg.output_dir()?)?;
    let m = open_manifest(&args.manifest)?;
    let all = load_scenes(&m, None);
    let setup = Setup::new(cfg, grid_of(&all), white_cubes(&all))?;
    let (spec, model_sha256) = match (&args.model, &args.method) {
        (Some(p), _) => {
            let bytes = std::fs::read(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            (p.to_string_lossy().into_owned(), Some(sha256_hex(&bytes)))
        }
        (None, Some(name)) if name == "pseudoinverse" => (name.clone(), None),
        (None, Some(name)) => return Err(usage(format!("unknown method `{name}`; expected pseudoinverse"))),
        (None, None) => unreachable!("clap enforces one source"),
    };
    let recon = reconstructor(&spec, &setup)?;
    let scenes: Vec<_> = all
        .iter()
        .filter(|s| args.tag.as_deref().is_none_or(|t| s.record.has_tag(t)))
        .collect();

    let done: Vec<ReconstructedScene> = scenes
        .par_iter()
        .map(|s| {
            let id = s.id().to_string();
            let r = check_id(&id)
                .and_then(|_| track_input(&m, s, &setup.track))
                .and_then(|rgb| recon.reconstruct(&rgb).map_err(|e| e.to_string()))
                .and_then(|cube| encode_cube(&cube).map_err(|e| e.to_string()))
                .and_then(|bytes| {
                    let file = format!("{id}.bhsc");
                    std::fs::write(out.join(&file), &bytes).map_err(|e| format!("{file}: {e}"))?;
                    Ok((file, sha256_hex(&bytes)))
                });
            match r {
                Ok((file, sha)) => ReconstructedScene {
                    id,
                    file: Some(file),
                    sha256: Some(sha),
                    error: None,
                },
                Err(e) => ReconstructedScene {
                    id,
                    file: None,
                    sha256: None,
                    error: Some(e),
                },
            }
        })
        .collect();
    let failed = report_failures(
        "reconstruct",
        done.iter().filter_map(|s| Some((s.id.as_str(), s.error.as_deref()?))),
    );
    let method = match &args.model {
        Some(_) => "model".to_string(),
        None => spec,
    };
    write_json(
        &out.join("reconstruct.json"),
        &ReconstructSidecar {
            config_hash: setup.provenance.hash(),
            provenance: &setup.provenance,
            method,
            model_sha256,
            scenes: done,
        },
    )?;
    println!("reconstructed {} of {} scenes into {}", scenes.len() - failed, scenes.len(), out.display());
    Ok(if failed > 0 { Status::Partial } else { Status::Ok })
}
