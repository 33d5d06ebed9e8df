//! `nnlms-lab`: theory-versus-simulation laboratory for the non-negative
//! LMS algorithm family.
//!
//! Exit status: 0 when every comparison passes and every ensemble
//! completes, 1 when a comparison fails its tolerance or an experiment
//! reports instability or ensemble failure, 2 for usage and manifest
//! errors.

mod manifest;
mod runner;

use anyhow::Result;
use clap::{Parser, Subcommand};
use nnlms_core::{build_correlation, kkt_report, nonnegative_quadratic_min, Ar1Process};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nnlms-lab",
    about = "Non-negative LMS laboratory: steady-state theory against seeded Monte Carlo simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a manifest and write trajectory/report artifacts
    Run {
        /// Manifest file (JSON; schema documented in the README)
        manifest: PathBuf,
        /// Output directory (overrides the manifest's output_dir)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comparison tolerance in dB
        #[arg(long, default_value_t = 1.0)]
        tolerance_db: f64,
        /// Base seed override for all experiments
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the steady-state predictions only (no simulation)
    Predict {
        /// Manifest file (JSON)
        manifest: PathBuf,
    },
    /// Solve the non-negative constrained Wiener problem and print the
    /// solution with its KKT residuals
    Nnls {
        /// System taps, comma separated (e.g. --weights 0.8,-0.05,0.3)
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        weights: Vec<f64>,
        /// AR(1) pole of the input process
        #[arg(long, allow_hyphen_values = true)]
        pole: f64,
        /// Innovation variance of the input process
        #[arg(long)]
        var: f64,
    },
}

/// Honors NNLMS_LAB_THREADS: a positive value caps the worker pool, 0 or
/// unset keeps the default.
fn configure_threads() {
    if let Ok(value) = std::env::var("NNLMS_LAB_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("ignoring NNLMS_LAB_THREADS={value}: not an integer"),
        }
    }
}

#[derive(Serialize)]
struct NnlsOutput {
    weights: Vec<f64>,
    pole: f64,
    innovation_variance: f64,
    input_variance: f64,
    solution: Vec<f64>,
    positive_set: Vec<usize>,
    zero_set: Vec<usize>,
    kkt: nnlms_core::KktReport,
}

fn run_nnls(weights: Vec<f64>, pole: f64, var: f64) -> Result<()> {
    let process = Ar1Process::new(pole, var, 0)?;
    let corr = build_correlation(&process, weights.len())?;
    let solution = nonnegative_quadratic_min(&corr, &weights)?;
    let kkt = kkt_report(&corr, &weights, &solution, 0.0)?;
    let positive_set: Vec<usize> = (0..solution.len()).filter(|&i| solution[i] > 0.0).collect();
    let zero_set: Vec<usize> = (0..solution.len()).filter(|&i| solution[i] == 0.0).collect();
    let output = NnlsOutput {
        input_variance: corr.input_variance(),
        weights,
        pole,
        innovation_variance: var,
        solution,
        positive_set,
        zero_set,
        kkt,
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            manifest,
            out,
            tolerance_db,
            seed,
        } => {
            let mut parsed = manifest::parse_config(&manifest)?;
            if let Some(dir) = out {
                parsed.output_dir = dir;
            }
            if let Some(seed) = seed {
                parsed.override_seed(seed);
            }
            let outcomes = runner::run_manifest(&parsed, tolerance_db)?;
            let failed: Vec<&str> = outcomes
                .iter()
                .filter(|o| !o.passed())
                .map(|o| o.name.as_str())
                .collect();
            Ok(if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed experiments: {}", failed.join(", "));
                ExitCode::FAILURE
            })
        }
        Command::Predict { manifest } => {
            let parsed = manifest::parse_config(&manifest)?;
            let all_ok = runner::predict_manifest(&parsed)?;
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Nnls { weights, pole, var } => {
            run_nnls(weights, pole, var)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
