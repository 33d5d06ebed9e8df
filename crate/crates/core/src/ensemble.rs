//! Seeded Monte Carlo ensembles of adaptive-filter trajectories.
//!
//! Each run simulates one filter on independently seeded input and noise
//! streams and records the squared a-priori excess error
//! `e_a(n) = (w* - w(n))' x(n)`, the error component due solely to weight
//! misadjustment. Averaging `e_a(n)^2` across runs estimates the EMSE
//! trajectory directly, without the noise-floor subtraction that averaging
//! `e(n)^2 - sigma_z^2` would need.
//!
//! Runs are embarrassingly parallel: run `r` derives its two stream seeds
//! from `(base_seed, r)` alone, and the reduction across runs always sums in
//! run order, so results are bitwise identical regardless of thread count or
//! scheduling.
//!
//! Divergence handling: a run whose weights go non-finite is excluded from
//! all statistics and counted. Because an escaping run can pollute the
//! steady-state window for thousands of iterations before its weights
//! overflow, each run is additionally simulated for a configurable
//! look-ahead margin past the recorded horizon; a run that overflows inside
//! the margin is classified as diverged even though its recorded samples
//! are all finite. The margin only affects classification, never the
//! recorded trajectory.

use crate::error::{Error, Result};
use crate::filters::{AlgorithmKind, FilterState};
use crate::rng::{derive_stream_seed, StreamKind};
use crate::signal::{Ar1Process, SampleStream, SystemModel};
use crate::theory::SteadyStatePrediction;
use rayon::prelude::*;

/// Default look-ahead margin as a fraction of the recorded iterations.
pub const DEFAULT_LOOKAHEAD_FRACTION: f64 = 0.5;

/// Full description of one ensemble experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SystemModel,
    pub process: Ar1Process,
    pub algorithm: AlgorithmKind,
    pub initial_weights: Vec<f64>,
    pub iterations: usize,
    pub runs: usize,
    pub base_seed: u64,
    /// Fraction of the trajectory tail averaged into the steady-state
    /// estimate, in (0, 0.5].
    pub steady_window_fraction: f64,
    /// Divergence look-ahead margin as a fraction of `iterations`;
    /// 0 disables the margin.
    pub divergence_lookahead_fraction: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.algorithm.validate()?;
        if self.iterations < 100 {
            return Err(Error::invalid(format!(
                "iterations must be >= 100, got {}",
                self.iterations
            )));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be >= 1"));
        }
        if self.initial_weights.len() != self.system.order() {
            return Err(Error::invalid(format!(
                "initial weights length {} does not match system order {}",
                self.initial_weights.len(),
                self.system.order()
            )));
        }
        if !self.initial_weights.iter().all(|w| w.is_finite()) {
            return Err(Error::invalid("initial weights must be finite"));
        }
        if !self.steady_window_fraction.is_finite()
            || self.steady_window_fraction <= 0.0
            || self.steady_window_fraction > 0.5
        {
            return Err(Error::invalid(format!(
                "steady window fraction must lie in (0, 0.5], got {}",
                self.steady_window_fraction
            )));
        }
        if !self.divergence_lookahead_fraction.is_finite()
            || self.divergence_lookahead_fraction < 0.0
            || self.divergence_lookahead_fraction > 10.0
        {
            return Err(Error::invalid(format!(
                "divergence look-ahead fraction must lie in [0, 10], got {}",
                self.divergence_lookahead_fraction
            )));
        }
        Ok(())
    }

    /// Number of trailing samples in the steady-state window (at least 1).
    pub fn steady_window_len(&self) -> usize {
        ((self.steady_window_fraction * self.iterations as f64).ceil() as usize)
            .clamp(1, self.iterations)
    }

    fn lookahead_iterations(&self) -> usize {
        (self.divergence_lookahead_fraction * self.iterations as f64).ceil() as usize
    }
}

/// Ensemble statistics over the non-diverged runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Per-iteration mean of the squared a-priori excess error.
    pub emse_trajectory: Vec<f64>,
    /// Mean of the trajectory over the steady-state window.
    pub steady_state_emse: f64,
    /// Standard error of `steady_state_emse`: sample standard deviation of
    /// the per-run window means divided by sqrt(completed runs). Infinite
    /// when fewer than two runs completed.
    pub steady_state_stderr: f64,
    /// Sample standard deviation of the per-run window means.
    pub run_mean_std: f64,
    /// Runs excluded because their weights overflowed within the recorded
    /// horizon or the look-ahead margin.
    pub diverged_runs: usize,
    /// Runs contributing to the statistics.
    pub completed_runs: usize,
    /// Mean final weight vector over completed runs.
    pub final_mean_weights: Vec<f64>,
}

enum RunOutcome {
    Completed {
        squared_excess: Vec<f64>,
        final_weights: Vec<f64>,
    },
    Diverged,
}

fn simulate_run(config: &ExperimentConfig, run: u64) -> RunOutcome {
    let input_seed = derive_stream_seed(config.base_seed, run, StreamKind::Input);
    let noise_seed = derive_stream_seed(config.base_seed, run, StreamKind::Noise);
    let process = config.process.with_seed(input_seed);
    let mut stream = SampleStream::new(&config.system, &process, noise_seed);
    let mut filter = FilterState::new(config.algorithm, config.initial_weights.clone())
        .expect("config validated");
    let truth = config.system.true_weights();

    let mut squared_excess = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        let sample = stream.next().expect("stream is infinite");
        let mut excess = 0.0;
        for ((t, w), x) in truth.iter().zip(filter.weights()).zip(&sample.regressor) {
            excess += (t - w) * x;
        }
        squared_excess.push(excess * excess);
        if filter.update_in_place(&sample).is_err() {
            return RunOutcome::Diverged;
        }
    }
    let final_weights = filter.weights().to_vec();
    // Classification margin: keep stepping to see whether the run was
    // already escaping at the horizon.
    for _ in 0..config.lookahead_iterations() {
        let sample = stream.next().expect("stream is infinite");
        if filter.update_in_place(&sample).is_err() {
            return RunOutcome::Diverged;
        }
    }
    RunOutcome::Completed {
        squared_excess,
        final_weights,
    }
}

/// Runs the ensemble and aggregates trajectory and steady-state statistics.
/// Identical configs produce bitwise-identical results.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let outcomes: Vec<RunOutcome> = (1..=config.runs as u64)
        .into_par_iter()
        .map(|run| simulate_run(config, run))
        .collect();

    let order = config.system.order();
    let iterations = config.iterations;
    let window = config.steady_window_len();
    let window_start = iterations - window;

    let mut trajectory_sum = vec![0.0_f64; iterations];
    let mut final_sum = vec![0.0_f64; order];
    let mut window_means = Vec::with_capacity(config.runs);
    let mut diverged = 0usize;

    // Fixed reduction order over the run index keeps results independent of
    // scheduling.
    for outcome in &outcomes {
        match outcome {
            RunOutcome::Diverged => diverged += 1,
            RunOutcome::Completed {
                squared_excess,
                final_weights,
            } => {
                for (acc, v) in trajectory_sum.iter_mut().zip(squared_excess) {
                    *acc += v;
                }
                for (acc, w) in final_sum.iter_mut().zip(final_weights) {
                    *acc += w;
                }
                let mean =
                    squared_excess[window_start..].iter().sum::<f64>() / window as f64;
                window_means.push(mean);
            }
        }
    }

    let completed = config.runs - diverged;
    if completed == 0 {
        return Err(Error::EnsembleFailure { runs: config.runs });
    }
    let scale = 1.0 / completed as f64;
    let emse_trajectory: Vec<f64> = trajectory_sum.iter().map(|s| s * scale).collect();
    let final_mean_weights: Vec<f64> = final_sum.iter().map(|s| s * scale).collect();
    let steady_state_emse =
        emse_trajectory[window_start..].iter().sum::<f64>() / window as f64;

    let (run_mean_std, steady_state_stderr) = if completed >= 2 {
        let mean = window_means.iter().sum::<f64>() / completed as f64;
        let var = window_means
            .iter()
            .map(|m| (m - mean).powi(2))
            .sum::<f64>()
            / (completed - 1) as f64;
        let std = var.sqrt();
        (std, std / (completed as f64).sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };

    Ok(EnsembleResult {
        emse_trajectory,
        steady_state_emse,
        steady_state_stderr,
        run_mean_std,
        diverged_runs: diverged,
        completed_runs: completed,
        final_mean_weights,
    })
}

/// Theory-versus-simulation comparison at a dB tolerance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ComparisonReport {
    pub simulated_emse: f64,
    pub predicted_emse: f64,
    pub simulated_db: f64,
    pub predicted_db: f64,
    pub absolute_difference: f64,
    /// `|10 log10(simulated) - 10 log10(predicted)|`.
    pub db_difference: f64,
    pub steady_state_stderr: f64,
    /// `absolute_difference / steady_state_stderr`.
    pub stderr_multiples: f64,
    pub tolerance_db: f64,
    /// True when `db_difference <= tolerance_db`.
    pub within_tolerance: bool,
    pub diverged_runs: usize,
    /// Set when any run diverged; the theory assumes convergence, so the
    /// comparison rests on the surviving sub-ensemble.
    pub divergence_flagged: bool,
}

/// Compares an ensemble estimate against a steady-state prediction.
pub fn compare(
    result: &EnsembleResult,
    prediction: &SteadyStatePrediction,
    tolerance_db: f64,
) -> ComparisonReport {
    let simulated = result.steady_state_emse;
    let predicted = prediction.emse_total;
    let db_difference = if simulated == predicted {
        0.0
    } else {
        (10.0 * (simulated.log10() - predicted.log10())).abs()
    };
    let absolute_difference = (simulated - predicted).abs();
    let stderr_multiples = if absolute_difference == 0.0 {
        0.0
    } else {
        absolute_difference / result.steady_state_stderr
    };
    ComparisonReport {
        simulated_emse: simulated,
        predicted_emse: predicted,
        simulated_db: 10.0 * simulated.log10(),
        predicted_db: 10.0 * predicted.log10(),
        absolute_difference,
        db_difference,
        steady_state_stderr: result.steady_state_stderr,
        stderr_multiples,
        tolerance_db,
        within_tolerance: db_difference <= tolerance_db,
        diverged_runs: result.diverged_runs,
        divergence_flagged: result.diverged_runs > 0,
    }
}
