//! `specbench`: simulate camera images from spectral cubes, fit and run
//! reconstruction baselines, and score them.
//!
//! Exit status is 0 on success, 1 when some scenes failed (or on any other
//! runtime error) and 2 on usage or configuration errors.

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod config;
mod data;
mod evaluate;
mod fit;
mod scenes;

use config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "specbench", version, about = "Benchmark spectral reconstruction from RGB: simulate cameras, fit baselines, score and rank methods")]
#[command(after_help = "Config file keys: track, css_path, white_level, white_level_percentile, output_dir, \
[noise] photon_gain/dark_sigma/seed, [jpeg] quality/subsampling, \
[metrics] denom_floor/cluster_count/cluster_seed/tau, [shuffle] patch/seed. \
Flags override the file.")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    /// Worker threads for per-scene work (default: all cores). Output does
    /// not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic cubes and a manifest.
    Synth(data::SynthArgs),
    /// Render clean and/or real-world RGB for every manifest scene.
    Simulate(data::SimulateArgs),
    /// Fit a linear or basis model on training scenes.
    Fit(fit::FitArgs),
    /// Reconstruct cubes with a fitted model or the pseudoinverse.
    Reconstruct(fit::ReconstructArgs),
    /// Score reconstructions against ground truth; optionally run the
    /// auxiliary robustness suite.
    Evaluate(evaluate::EvaluateArgs),
    /// Render leaderboard and auxiliary CSVs as Markdown, text or CSV.
    Report(evaluate::ReportArgs),
}

pub enum Status {
    Ok,
    Partial,
}

/// Marks an error as a usage or configuration problem (exit status 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn run(cli: &Cli) -> Result<Status> {
    let o = &cli.overrides;
    match &cli.command {
        Command::Synth(a) => data::synth(a, o),
        Command::Simulate(a) => data::simulate(a, o),
        Command::Fit(a) => fit::fit(a, o),
        Command::Reconstruct(a) => fit::reconstruct(a, o),
        Command::Evaluate(a) => evaluate::evaluate(a, o),
        Command::Report(a) => evaluate::report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(0) => Err(usage("--jobs must be at least 1")),
        jobs => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| run(&cli))),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
