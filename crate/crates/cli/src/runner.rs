//! Experiment orchestration and artifact emission.
//!
//! For each manifest entry: predict the steady state, run the ensemble,
//! compare, and write `<name>-trajectory.csv` plus `<name>-report.json`.
//! Files are written atomically (temp file, then rename) and all float
//! formatting uses the shortest round-trip decimal, so a fixed manifest
//! produces byte-identical artifacts.

use crate::manifest::{ManifestEntry, MeanWeightsMode, RunManifest};
use anyhow::{Context, Result};
use nnlms_core::{
    build_correlation, compare, predict_emse, run_ensemble, solve_constrained_wiener,
    ComparisonReport, CorrelationModel, EnsembleResult, Error as CoreError,
    SteadyStatePrediction,
};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentStatus {
    Ok,
    PredictedInstability,
    EnsembleFailure,
}

impl ExperimentStatus {
    fn label(self) -> &'static str {
        match self {
            ExperimentStatus::Ok => "ok",
            ExperimentStatus::PredictedInstability => "predicted-instability",
            ExperimentStatus::EnsembleFailure => "ensemble-failure",
        }
    }
}

/// Outcome of one manifest entry, kept for the exit-status decision.
pub struct ExperimentOutcome {
    pub name: String,
    pub status: ExperimentStatus,
    pub comparison_passed: bool,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.status == ExperimentStatus::Ok && self.comparison_passed
    }
}

#[derive(Serialize)]
struct ReportConfig<'a> {
    algorithm: &'a str,
    step_size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regularizer: Option<f64>,
    iterations: usize,
    runs: usize,
    base_seed: u64,
    steady_window_fraction: f64,
    divergence_lookahead_fraction: f64,
    mean_weights: &'a str,
    initial_weights: &'a [f64],
    true_weights: &'a [f64],
    noise_variance: f64,
    input_pole: f64,
    input_innovation_variance: f64,
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    steady_state_emse: f64,
    steady_state_emse_db: f64,
    /// Serialized as null when not estimable (fewer than two runs).
    steady_state_stderr: f64,
    run_mean_std: f64,
    completed_runs: usize,
    diverged_runs: usize,
    final_mean_weights: &'a [f64],
}

#[derive(Serialize)]
struct Report<'a> {
    name: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    config: ReportConfig<'a>,
    prediction: Option<&'a SteadyStatePrediction>,
    ensemble: Option<EnsembleSummary<'a>>,
    comparison: Option<&'a ComparisonReport>,
}

/// Writes `data` to `path` atomically within its parent directory.
pub fn atomic_write(path: &Path, data: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let temp = parent.join(format!(".tmp_{}_{stem}", std::process::id()));
    {
        let mut file = fs::File::create(&temp)
            .with_context(|| format!("cannot create {}", temp.display()))?;
        file.write_all(data)?;
        file.sync_all()?;
    }
    fs::rename(&temp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

/// Renders the EMSE trajectory as `iteration,emse,emse_db` rows. Iterations
/// are one-based; floats use shortest round-trip formatting.
fn trajectory_csv(trajectory: &[f64]) -> String {
    let mut out = String::with_capacity(trajectory.len() * 24 + 32);
    out.push_str("iteration,emse,emse_db\n");
    for (i, &value) in trajectory.iter().enumerate() {
        let db = 10.0 * value.log10();
        out.push_str(&format!("{},{},{}\n", i + 1, value, db));
    }
    out
}

fn db(value: f64) -> f64 {
    10.0 * value.log10()
}

struct EntryEvaluation {
    status: ExperimentStatus,
    error: Option<String>,
    prediction: Option<SteadyStatePrediction>,
    ensemble: Option<EnsembleResult>,
    comparison: Option<ComparisonReport>,
}

/// Theory plus simulation for one entry. Instability and total ensemble
/// divergence are recorded rather than propagated; real defects (bad
/// dimensions, broken manifests) propagate as errors.
fn evaluate_entry(
    entry: &ManifestEntry,
    corr: &CorrelationModel,
    mode: MeanWeightsMode,
    tolerance_db: f64,
) -> Result<EntryEvaluation> {
    let config = &entry.config;
    let model = &config.system;

    // With the constrained-solver mean weights the prediction exists before
    // any simulation; an unstable prediction skips the ensemble (the theory
    // already refuses the configuration).
    if mode == MeanWeightsMode::Nnls {
        let mean = solve_constrained_wiener(model, corr)?;
        let prediction = match predict_emse(model, corr, &mean, &config.algorithm) {
            Ok(p) => p,
            Err(e @ CoreError::PredictedInstability { .. }) => {
                return Ok(EntryEvaluation {
                    status: ExperimentStatus::PredictedInstability,
                    error: Some(e.to_string()),
                    prediction: None,
                    ensemble: None,
                    comparison: None,
                });
            }
            Err(e) => return Err(e.into()),
        };
        let ensemble = match run_ensemble(config) {
            Ok(r) => r,
            Err(e @ CoreError::EnsembleFailure { .. }) => {
                return Ok(EntryEvaluation {
                    status: ExperimentStatus::EnsembleFailure,
                    error: Some(e.to_string()),
                    prediction: Some(prediction),
                    ensemble: None,
                    comparison: None,
                });
            }
            Err(e) => return Err(e.into()),
        };
        let comparison = compare(&ensemble, &prediction, tolerance_db);
        return Ok(EntryEvaluation {
            status: ExperimentStatus::Ok,
            error: None,
            prediction: Some(prediction),
            ensemble: Some(ensemble),
            comparison: Some(comparison),
        });
    }

    // Empirical mean weights come from the ensemble itself.
    let ensemble = match run_ensemble(config) {
        Ok(r) => r,
        Err(e @ CoreError::EnsembleFailure { .. }) => {
            return Ok(EntryEvaluation {
                status: ExperimentStatus::EnsembleFailure,
                error: Some(e.to_string()),
                prediction: None,
                ensemble: None,
                comparison: None,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let prediction = match predict_emse(
        model,
        corr,
        &ensemble.final_mean_weights,
        &config.algorithm,
    ) {
        Ok(p) => p,
        Err(e @ CoreError::PredictedInstability { .. }) => {
            return Ok(EntryEvaluation {
                status: ExperimentStatus::PredictedInstability,
                error: Some(e.to_string()),
                prediction: None,
                ensemble: Some(ensemble),
                comparison: None,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let comparison = compare(&ensemble, &prediction, tolerance_db);
    Ok(EntryEvaluation {
        status: ExperimentStatus::Ok,
        error: None,
        prediction: Some(prediction),
        ensemble: Some(ensemble),
        comparison: Some(comparison),
    })
}

fn algorithm_fields(entry: &ManifestEntry) -> (Option<f64>, Option<f64>) {
    use nnlms_core::AlgorithmKind::*;
    match entry.config.algorithm {
        ExponentialNnlms { exponent, .. } => (Some(exponent), None),
        NormalizedNnlms { regularizer, .. } => (None, Some(regularizer)),
        _ => (None, None),
    }
}

/// Runs every entry, writes artifacts, prints one summary line per entry,
/// and returns the outcomes for the exit-status decision.
pub fn run_manifest(manifest: &RunManifest, tolerance_db: f64) -> Result<Vec<ExperimentOutcome>> {
    fs::create_dir_all(&manifest.output_dir).with_context(|| {
        format!(
            "cannot create output directory {}",
            manifest.output_dir.display()
        )
    })?;

    let mut outcomes = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let config = &entry.config;
        let corr = build_correlation(&config.process, config.system.order())?;
        let evaluation = evaluate_entry(entry, &corr, manifest.mean_weights, tolerance_db)?;

        if manifest.emit.trajectory_csv {
            if let Some(ensemble) = &evaluation.ensemble {
                let path = manifest
                    .output_dir
                    .join(format!("{}-trajectory.csv", entry.name));
                atomic_write(&path, trajectory_csv(&ensemble.emse_trajectory).as_bytes())?;
            }
        }
        if manifest.emit.report_json {
            let (exponent, regularizer) = algorithm_fields(entry);
            let report = Report {
                name: &entry.name,
                status: evaluation.status.label(),
                error: evaluation.error.clone(),
                config: ReportConfig {
                    algorithm: config.algorithm.name(),
                    step_size: config.algorithm.step_size(),
                    exponent,
                    regularizer,
                    iterations: config.iterations,
                    runs: config.runs,
                    base_seed: config.base_seed,
                    steady_window_fraction: config.steady_window_fraction,
                    divergence_lookahead_fraction: config.divergence_lookahead_fraction,
                    mean_weights: manifest.mean_weights.label(),
                    initial_weights: &config.initial_weights,
                    true_weights: config.system.true_weights(),
                    noise_variance: config.system.noise_variance(),
                    input_pole: config.process.pole(),
                    input_innovation_variance: config.process.innovation_variance(),
                },
                prediction: evaluation.prediction.as_ref(),
                ensemble: evaluation.ensemble.as_ref().map(|e| EnsembleSummary {
                    steady_state_emse: e.steady_state_emse,
                    steady_state_emse_db: db(e.steady_state_emse),
                    steady_state_stderr: e.steady_state_stderr,
                    run_mean_std: e.run_mean_std,
                    completed_runs: e.completed_runs,
                    diverged_runs: e.diverged_runs,
                    final_mean_weights: &e.final_mean_weights,
                }),
                comparison: evaluation.comparison.as_ref(),
            };
            let path = manifest
                .output_dir
                .join(format!("{}-report.json", entry.name));
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            atomic_write(&path, json.as_bytes())?;
        }

        let comparison_passed = evaluation
            .comparison
            .as_ref()
            .map(|c| c.within_tolerance)
            .unwrap_or(false);
        match (&evaluation.comparison, evaluation.status) {
            (Some(c), _) => {
                let verdict = if c.within_tolerance { "PASS" } else { "FAIL" };
                let flag = if c.divergence_flagged {
                    format!(" [{} diverged runs excluded]", c.diverged_runs)
                } else {
                    String::new()
                };
                println!(
                    "{}: simulated {:.3} dB, predicted {:.3} dB, |diff| {:.3} dB <= {:.3} dB: {verdict}{flag}",
                    entry.name, c.simulated_db, c.predicted_db, c.db_difference, c.tolerance_db
                );
            }
            (None, status) => {
                println!(
                    "{}: {} ({})",
                    entry.name,
                    status.label(),
                    evaluation.error.as_deref().unwrap_or("no detail")
                );
            }
        }
        outcomes.push(ExperimentOutcome {
            name: entry.name.clone(),
            status: evaluation.status,
            comparison_passed,
        });
    }
    Ok(outcomes)
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    name: &'a str,
    algorithm: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    prediction: Option<SteadyStatePrediction>,
}

#[derive(Serialize)]
struct PredictionDocument<'a> {
    mean_weights: &'a str,
    predictions: Vec<PredictionLine<'a>>,
}

/// Theory-only evaluation: prints one JSON document with the predictions
/// for every entry. Always uses the constrained-solver mean weights since
/// no simulation runs. Returns false when any entry is unstable.
pub fn predict_manifest(manifest: &RunManifest) -> Result<bool> {
    let mut lines = Vec::with_capacity(manifest.entries.len());
    let mut all_ok = true;
    for entry in &manifest.entries {
        let config = &entry.config;
        let corr = build_correlation(&config.process, config.system.order())?;
        let mean = solve_constrained_wiener(&config.system, &corr)?;
        let line = match predict_emse(&config.system, &corr, &mean, &config.algorithm) {
            Ok(p) => PredictionLine {
                name: &entry.name,
                algorithm: config.algorithm.name(),
                status: "ok",
                error: None,
                prediction: Some(p),
            },
            Err(e @ CoreError::PredictedInstability { .. }) => {
                all_ok = false;
                PredictionLine {
                    name: &entry.name,
                    algorithm: config.algorithm.name(),
                    status: "predicted-instability",
                    error: Some(e.to_string()),
                    prediction: None,
                }
            }
            Err(e) => return Err(e.into()),
        };
        lines.push(line);
    }
    let document = PredictionDocument {
        mean_weights: MeanWeightsMode::Nnls.label(),
        predictions: lines,
    };
    println!("{}", serde_json::to_string_pretty(&document)?);
    Ok(all_ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_are_one_based_with_headers() {
        let csv = trajectory_csv(&[1.0, 0.5]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iteration,emse,emse_db"));
        assert_eq!(lines.next(), Some("1,1,0"));
        let second = lines.next().unwrap();
        assert!(second.starts_with("2,0.5,"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn csv_formatting_round_trips() {
        let values = [3.6024e-3, 1.0 / 3.0, 2e-300];
        let csv = trajectory_csv(&values);
        for (line, original) in csv.lines().skip(1).zip(values) {
            let emse: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(emse.to_bits(), original.to_bits());
        }
    }
}
