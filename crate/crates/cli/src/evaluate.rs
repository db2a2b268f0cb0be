//! `evaluate` and `report`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use specbench::io::bhsc::read_cube;
use specbench::metrics::{mrae, mrae_pooled, rmse};
use specbench::report::{aux_csv, aux_text, parse_leaderboards, render_markdown, Leaderboard};
use specbench::robustness::{run_aux_scene, AuxReport, AuxRow, AuxScene};
use specbench::HsiCube;

use crate::config::Setup;
use crate::fit::reconstructor;
use crate::scenes::{create_dir, grid_of, load_scenes, open_manifest, report_failures, white_cubes, Scene};
use crate::{usage, Status};

/// `NAME=VALUE`, as taken by `--method` and `--aux`.
fn named(s: &str) -> Result<(String, String), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
    if !ok || value.is_empty() {
        return Err(format!("bad NAME=VALUE pair `{s}`; names use letters, digits, `-`, `_` and `.`"));
    }
    Ok((name.to_string(), value.to_string()))
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// A method's reconstructions: directory holding `<scene>.bhsc`.
    #[arg(long = "method", value_name = "NAME=DIR", value_parser = named)]
    pub methods: Vec<(String, String)>,
    /// Auxiliary suite for a reconstructor: `pseudoinverse` or a model file.
    #[arg(long = "aux", value_name = "NAME=MODEL", value_parser = named)]
    pub aux: Vec<(String, String)>,
    /// Pool all entries of all scenes instead of averaging per-scene scores.
    #[arg(long)]
    pub pooled: bool,
    /// Only scenes with this tag.
    #[arg(long)]
    pub tag: Option<String>,
}

struct Score {
    method: String,
    scene: String,
    mrae: f64,
    rmse: f64,
    error: Option<String>,
}

fn score_scene(scene: &Scene, dir: &Path, cfg: &specbench::metrics::MetricConfig) -> Result<(HsiCube, f64, f64), String> {
    let gt = scene.cube.as_ref().map_err(|e| format!("ground truth: {e}"))?;
    let rec = read_cube(dir.join(format!("{}.bhsc", scene.id()))).map_err(|e| e.to_string())?;
    if !rec.same_shape(gt) {
        return Err(format!(
            "geometry mismatch: reconstruction is {}x{}x{}, ground truth {}x{}x{}",
            rec.height(),
            rec.width(),
            rec.bands(),
            gt.height(),
            gt.width(),
            gt.bands()
        ));
    }
    let m = mrae(gt, &rec, cfg).map_err(|e| e.to_string())?;
    let r = rmse(gt, &rec).map_err(|e| e.to_string())?;
    Ok((rec, m, r))
}

fn scores_csv(scores: &[Score], comment: &[String]) -> Result<String> {
    let mut out = String::new();
    for c in comment {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "scene", "mrae", "rmse", "error"])?;
    for s in scores {
        let num = |v: f64| if s.error.is_some() { String::new() } else { v.to_string() };
        w.write_record([
            s.method.clone(),
            s.scene.clone(),
            num(s.mrae),
            num(s.rmse),
            s.error.clone().unwrap_or_default(),
        ])?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?)?);
    Ok(out)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| path.display().to_string())
}

pub fn evaluate(args: &EvaluateArgs, o: &crate::config::Overrides) -> Result<Status> {
    if args.methods.is_empty() && args.aux.is_empty() {
        return Err(usage("nothing to evaluate; pass --method and/or --aux"));
    }
    let cfg = o.resolve()?;
    let out = create_dir(cfg.output_dir()?)?;
    let m = open_manifest(&args.manifest)?;
    let all = load_scenes(&m, None);
    let setup = Setup::new(cfg, grid_of(&all), white_cubes(&all))?;
    let metric = setup.cfg.metrics;
    let scenes: Vec<&Scene> = all
        .iter()
        .filter(|s| args.tag.as_deref().is_none_or(|t| s.record.has_tag(t)))
        .collect();
    let mut comment = setup.provenance.comment_lines();
    comment.push(format!("aggregation={}", if args.pooled { "pooled" } else { "per_image" }));
    let mut failed = 0;

    if !args.methods.is_empty() {
        let mut entries = Vec::new();
        let mut scores = Vec::new();
        for (name, dir) in &args.methods {
            let results: Vec<_> = scenes
                .par_iter()
                .map(|s| score_scene(s, Path::new(dir), &metric))
                .collect();
            let mut ok = Vec::new();
            for (s, r) in scenes.iter().zip(results) {
                let (mrae, rmse, error) = match r {
                    Ok((rec, m, r)) => {
                        ok.push((s.cube.as_ref().expect("scored scenes have a cube"), rec, m, r));
                        (m, r, None)
                    }
                    Err(e) => (f64::NAN, f64::NAN, Some(e)),
                };
                scores.push(Score {
                    method: name.clone(),
                    scene: s.id().to_string(),
                    mrae,
                    rmse,
                    error,
                });
            }
            let n = ok.len() as f64;
            let (mean_mrae, mean_rmse) = if args.pooled && !ok.is_empty() {
                let pairs: Vec<_> = ok.iter().map(|(gt, rec, _, _)| (*gt, rec)).collect();
                let count: f64 = ok.iter().map(|(gt, ..)| gt.data().len() as f64).sum();
                let sq: f64 = ok.iter().map(|(gt, _, _, r)| r * r * gt.data().len() as f64).sum();
                (mrae_pooled(&pairs, &metric)?, (sq / count).sqrt())
            } else {
                (
                    ok.iter().map(|o| o.2).sum::<f64>() / n,
                    ok.iter().map(|o| o.3).sum::<f64>() / n,
                )
            };
            entries.push((name.clone(), mean_mrae, mean_rmse));
        }
        failed += report_failures(
            "evaluate",
            scores
                .iter()
                .filter_map(|s| Some((s.scene.as_str(), s.error.as_deref()?))),
        );
        let board = Leaderboard::new(setup.track.track, entries);
        write(&out.join("leaderboard.csv"), &board.to_csv(&comment))?;
        write(&out.join("scores.csv"), &scores_csv(&scores, &comment)?)?;
        print!("{}", board.to_text());
    }

    let mut reports = Vec::new();
    for (name, spec) in &args.aux {
        let recon = reconstructor(spec, &setup)?;
        let suite = setup.suite_config();
        let rows: Vec<AuxRow> = scenes
            .par_iter()
            .map(|s| match &s.cube {
                Ok(cube) => run_aux_scene(
                    &AuxScene {
                        id: s.id().to_string(),
                        cube: cube.clone(),
                        out_of_scope: s.record.has_tag(specbench::io::manifest::OUT_OF_SCOPE_TAG),
                    },
                    recon.as_ref(),
                    &suite,
                ),
                Err(e) => AuxRow {
                    id: s.id().to_string(),
                    cells: [None; 7],
                    error: Some(e.clone()),
                },
            })
            .collect();
        let report = AuxReport {
            track: setup.track.track,
            rows,
        };
        failed += report_failures(
            &format!("aux {name}"),
            report.failed().map(|r| (r.id.as_str(), r.error.as_deref().unwrap_or(""))),
        );
        let mut c = comment.clone();
        c.push(format!("method={name}"));
        write(&out.join(format!("aux_{name}.csv")), &report.to_csv(&c))?;
        reports.push((name.clone(), report));
    }
    if !reports.is_empty() {
        let refs: Vec<(&str, &AuxReport)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
        print!("{}", aux_text(&refs));
    }
    Ok(if failed > 0 { Status::Partial } else { Status::Ok })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Markdown,
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Leaderboard CSV from `evaluate`; repeat for several tracks.
    #[arg(long = "leaderboard", value_name = "FILE")]
    pub leaderboards: Vec<PathBuf>,
    /// Auxiliary CSV from `evaluate`, labelled with a method name.
    #[arg(long = "aux", value_name = "NAME=FILE", value_parser = named)]
    pub aux: Vec<(String, String)>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Comment lines of a CSV file, without the `# ` prefix.
fn comments(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(str::trim)
        .filter(|l| !l.starts_with("leaderboard v"))
}

fn render(args: &ReportArgs) -> Result<String> {
    let mut provenance: Vec<String> = Vec::new();
    let mut note = |text: &str| {
        for c in comments(text) {
            if !provenance.iter().any(|p| p == c) {
                provenance.push(c.to_string());
            }
        }
    };
    let mut boards: Vec<Leaderboard> = Vec::new();
    for p in &args.leaderboards {
        let text = std::fs::read_to_string(p).with_context(|| p.display().to_string())?;
        note(&text);
        boards.extend(parse_leaderboards(&text).with_context(|| p.display().to_string())?);
    }
    let mut aux = Vec::new();
    for (name, file) in &args.aux {
        let text = std::fs::read_to_string(file).with_context(|| file.clone())?;
        note(&text);
        aux.push((name.clone(), AuxReport::from_csv(&text).with_context(|| file.clone())?));
    }
    let aux_refs: Vec<(&str, &AuxReport)> = aux.iter().map(|(n, r)| (n.as_str(), r)).collect();

    Ok(match args.format {
        Format::Markdown => render_markdown(&boards, &aux_refs, &provenance),
        Format::Text => {
            let mut out = String::new();
            for p in &provenance {
                out.push_str(&format!("# {p}\n"));
            }
            for b in &boards {
                out.push_str(&format!("Leaderboard: {} track\n{}\n", b.track.name(), b.to_text()));
            }
            if !aux_refs.is_empty() {
                out.push_str(&format!("Auxiliary tests\n{}", aux_text(&aux_refs)));
            }
            out
        }
        Format::Csv if !boards.is_empty() && !aux_refs.is_empty() => {
            return Err(usage("CSV output holds one table; pass either --leaderboard or --aux"))
        }
        Format::Csv if aux_refs.is_empty() => boards
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let csv = b.to_csv(if i == 0 { &provenance } else { &[] });
                // Later boards share the first header.
                if i == 0 {
                    csv
                } else {
                    csv.lines().skip(2).map(|l| format!("{l}\n")).collect()
                }
            })
            .collect(),
        Format::Csv => aux_csv(&aux_refs, &provenance),
    })
}

pub fn report(args: &ReportArgs) -> Result<Status> {
    if args.leaderboards.is_empty() && args.aux.is_empty() {
        return Err(usage("nothing to report; pass --leaderboard and/or --aux"));
    }
    let text = render(args)?;
    match &args.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(Status::Ok)
}
