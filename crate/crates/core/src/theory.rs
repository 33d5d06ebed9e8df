//! Closed-form steady-state excess mean-square error (EMSE).
//!
//! The steady-state EMSE splits into two parts:
//!
//! * a bias term `EMSE_inf = v' R v` with `v = E{w(inf)} - w*`, produced by
//!   the constraint clamping some mean weights to zero, and
//! * a fluctuation term from weight jitter around the converged mean.
//!
//! With `T = trace(diag(m) R)` evaluated at the mean weights `m`, the
//! fluctuation term for the multiplicative rule is
//! `eta (sigma_z^2 T + EMSE_inf) / (2 - eta T)`. The normalized rule uses
//! the same expression at the equivalent step `eta / (N sigma_x^2)`, the
//! exponential rule replaces `m_i` by `m_i^gamma` inside the trace, and the
//! sign-sign rule has fluctuation
//! `eta pi/4 * sum(m) * sigma_x * sqrt(sigma_z^2 + EMSE_inf)`.
//!
//! The mean weights are taken from the caller: either the constrained
//! minimizer from [`crate::nnls`] (exact for vanishing step sizes) or an
//! ensemble-averaged estimate when the finite-step bias matters. Entries at
//! or below a support threshold are snapped to exact zero before any
//! formula is evaluated.

use crate::error::{Error, Result};
use crate::filters::AlgorithmKind;
use crate::signal::{Ar1Process, SystemModel};

/// Input correlation structure: the full matrix and the common diagonal
/// (input variance).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    order: usize,
    matrix: Vec<f64>,
    input_variance: f64,
}

impl CorrelationModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn input_variance(&self) -> f64 {
        self.input_variance
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.order + col]
    }

    /// Matrix-vector product `R v`.
    pub fn multiply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.order);
        (0..self.order)
            .map(|i| {
                let row = &self.matrix[i * self.order..(i + 1) * self.order];
                row.iter().zip(v).map(|(r, x)| r * x).sum()
            })
            .collect()
    }

    /// Quadratic form `v' R v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.order);
        self.multiply(v).iter().zip(v).map(|(rv, x)| rv * x).sum()
    }
}

/// Correlation matrix of a stationary AR(1) regressor of the given order:
/// Toeplitz with entries `sigma_x^2 * pole^|i-j|`.
pub fn build_correlation(process: &Ar1Process, order: usize) -> Result<CorrelationModel> {
    if order == 0 {
        return Err(Error::invalid("correlation order must be >= 1"));
    }
    let variance = process.stationary_variance();
    let pole = process.pole();
    let mut matrix = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            matrix[i * order + j] = variance * pole.powi((i as i32 - j as i32).abs());
        }
    }
    Ok(CorrelationModel {
        order,
        matrix,
        input_variance: variance,
    })
}

/// Indices of mean weights that converge to positive values versus to zero.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SupportPartition {
    pub positive: Vec<usize>,
    pub zero: Vec<usize>,
}

/// Splits weights into the positive set and the zero set: entries at or
/// below `threshold` belong to the zero set.
pub fn classify_support(weights: &[f64], threshold: f64) -> Result<SupportPartition> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::invalid(format!(
            "support threshold must be finite and > 0, got {threshold}"
        )));
    }
    let mut positive = Vec::new();
    let mut zero = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        if w <= threshold {
            zero.push(i);
        } else {
            positive.push(i);
        }
    }
    Ok(SupportPartition { positive, zero })
}

/// Relative factor for the default support threshold.
///
/// The constrained solver returns exact zeros, but ensemble-averaged mean
/// weights carry statistical residue; a threshold relative to the largest
/// weight absorbs it.
pub const DEFAULT_SUPPORT_THRESHOLD_FACTOR: f64 = 1e-6;

/// `DEFAULT_SUPPORT_THRESHOLD_FACTOR * max(weights)`, with a tiny positive
/// floor so an all-zero vector still classifies.
pub fn default_support_threshold(weights: &[f64]) -> f64 {
    let max = weights.iter().fold(0.0_f64, |m, &w| m.max(w));
    if max > 0.0 {
        DEFAULT_SUPPORT_THRESHOLD_FACTOR * max
    } else {
        f64::MIN_POSITIVE
    }
}

/// Bias contribution to the steady-state EMSE: `v' R v`, clamped at zero
/// against rounding.
pub fn emse_bias_term(bias: &[f64], corr: &CorrelationModel) -> Result<f64> {
    if bias.len() != corr.order() {
        return Err(Error::invalid(format!(
            "bias length {} does not match correlation order {}",
            bias.len(),
            corr.order()
        )));
    }
    Ok(corr.quadratic_form(bias).max(0.0))
}

/// Steady-state prediction for one algorithm on one system.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SteadyStatePrediction {
    /// Mean weights used by the formulas, with the zero set snapped to 0.
    pub mean_weights: Vec<f64>,
    /// Indices converging to strictly positive values.
    pub positive_set: Vec<usize>,
    /// Indices converging to zero.
    pub zero_set: Vec<usize>,
    /// `mean_weights - true_weights`.
    pub bias_vector: Vec<f64>,
    /// Bias term `bias' R bias`.
    pub emse_bias: f64,
    /// Fluctuation term.
    pub emse_fluctuation: f64,
    /// `emse_fluctuation + emse_bias`.
    pub emse_total: f64,
}

struct PreparedWeights {
    snapped: Vec<f64>,
    partition: SupportPartition,
    bias: Vec<f64>,
    emse_bias: f64,
}

fn prepare(
    model: &SystemModel,
    corr: &CorrelationModel,
    mean_weights: &[f64],
) -> Result<PreparedWeights> {
    let n = model.order();
    if corr.order() != n || mean_weights.len() != n {
        return Err(Error::invalid(format!(
            "model order {n}, correlation order {}, mean weights {} must agree",
            corr.order(),
            mean_weights.len()
        )));
    }
    if !mean_weights.iter().all(|w| w.is_finite()) {
        return Err(Error::invalid("mean weights must be finite"));
    }
    let partition = classify_support(mean_weights, default_support_threshold(mean_weights))?;
    let mut snapped = mean_weights.to_vec();
    for &i in &partition.zero {
        snapped[i] = 0.0;
    }
    let bias: Vec<f64> = snapped
        .iter()
        .zip(model.true_weights())
        .map(|(m, t)| m - t)
        .collect();
    let emse_bias = emse_bias_term(&bias, corr)?;
    Ok(PreparedWeights {
        snapped,
        partition,
        bias,
        emse_bias,
    })
}

fn validate_step(step_size: f64) -> Result<()> {
    if !step_size.is_finite() || step_size < 0.0 {
        return Err(Error::invalid(format!(
            "step size must be finite and >= 0, got {step_size}"
        )));
    }
    Ok(())
}

/// Fluctuation term `eta (sigma_z^2 T + bias) / (2 - eta T)`; fails when the
/// stability margin `2 - eta T` is not positive.
fn fluctuation(step_size: f64, noise_variance: f64, trace_term: f64, emse_bias: f64) -> Result<f64> {
    let margin = 2.0 - step_size * trace_term;
    if margin <= 0.0 {
        return Err(Error::PredictedInstability { step_size, margin });
    }
    Ok(step_size * (noise_variance * trace_term + emse_bias) / margin)
}

fn assemble(prepared: PreparedWeights, emse_fluctuation: f64) -> SteadyStatePrediction {
    SteadyStatePrediction {
        mean_weights: prepared.snapped,
        positive_set: prepared.partition.positive,
        zero_set: prepared.partition.zero,
        bias_vector: prepared.bias,
        emse_bias: prepared.emse_bias,
        emse_fluctuation,
        emse_total: emse_fluctuation + prepared.emse_bias,
    }
}

/// Steady-state EMSE of the multiplicative rule at step `eta`, evaluated at
/// the given mean weights.
pub fn predict_emse_nnlms(
    model: &SystemModel,
    corr: &CorrelationModel,
    mean_weights: &[f64],
    step_size: f64,
) -> Result<SteadyStatePrediction> {
    validate_step(step_size)?;
    let prepared = prepare(model, corr, mean_weights)?;
    // trace(diag(m) R) touches only the diagonal of R.
    let trace_term: f64 = prepared
        .snapped
        .iter()
        .enumerate()
        .map(|(i, m)| m * corr.entry(i, i))
        .sum();
    let fluct = fluctuation(step_size, model.noise_variance(), trace_term, prepared.emse_bias)?;
    Ok(assemble(prepared, fluct))
}

/// Steady-state EMSE of the normalized rule: the multiplicative expression
/// at the equivalent step `eta / (N sigma_x^2)`.
pub fn predict_emse_normalized(
    model: &SystemModel,
    corr: &CorrelationModel,
    mean_weights: &[f64],
    step_size: f64,
) -> Result<SteadyStatePrediction> {
    validate_step(step_size)?;
    let equivalent = step_size / (corr.order() as f64 * corr.input_variance());
    predict_emse_nnlms(model, corr, mean_weights, equivalent)
}

/// Steady-state EMSE of the exponential rule: the trace uses `m_i^gamma`.
/// Exponent 1 delegates to the multiplicative predictor exactly.
pub fn predict_emse_exponential(
    model: &SystemModel,
    corr: &CorrelationModel,
    mean_weights: &[f64],
    step_size: f64,
    exponent: f64,
) -> Result<SteadyStatePrediction> {
    validate_step(step_size)?;
    if !exponent.is_finite() || exponent <= 0.0 || exponent > 1.0 {
        return Err(Error::invalid(format!(
            "exponent must lie in (0, 1], got {exponent}"
        )));
    }
    if exponent == 1.0 {
        return predict_emse_nnlms(model, corr, mean_weights, step_size);
    }
    let prepared = prepare(model, corr, mean_weights)?;
    let trace_term: f64 = prepared
        .snapped
        .iter()
        .enumerate()
        .map(|(i, m)| if *m > 0.0 { m.powf(exponent) * corr.entry(i, i) } else { 0.0 })
        .sum();
    let fluct = fluctuation(step_size, model.noise_variance(), trace_term, prepared.emse_bias)?;
    Ok(assemble(prepared, fluct))
}

/// Steady-state EMSE of the sign-sign rule:
/// `eta pi/4 * sum(m) * sigma_x * sqrt(sigma_z^2 + EMSE_inf) + EMSE_inf`.
pub fn predict_emse_signsign(
    model: &SystemModel,
    corr: &CorrelationModel,
    mean_weights: &[f64],
    step_size: f64,
) -> Result<SteadyStatePrediction> {
    validate_step(step_size)?;
    let prepared = prepare(model, corr, mean_weights)?;
    let weight_sum: f64 = prepared.snapped.iter().sum();
    let sigma_x = corr.input_variance().sqrt();
    let fluct = step_size * std::f64::consts::FRAC_PI_4
        * weight_sum
        * sigma_x
        * (model.noise_variance() + prepared.emse_bias).sqrt();
    Ok(assemble(prepared, fluct))
}

/// Dispatches to the predictor matching the algorithm kind. The plain LMS
/// baseline has no predictor here.
pub fn predict_emse(
    model: &SystemModel,
    corr: &CorrelationModel,
    mean_weights: &[f64],
    kind: &AlgorithmKind,
) -> Result<SteadyStatePrediction> {
    match *kind {
        AlgorithmKind::Nnlms { step_size } => {
            predict_emse_nnlms(model, corr, mean_weights, step_size)
        }
        AlgorithmKind::NormalizedNnlms { step_size, .. } => {
            predict_emse_normalized(model, corr, mean_weights, step_size)
        }
        AlgorithmKind::ExponentialNnlms {
            step_size,
            exponent,
        } => predict_emse_exponential(model, corr, mean_weights, step_size, exponent),
        AlgorithmKind::SignSignNnlms { step_size } => {
            predict_emse_signsign(model, corr, mean_weights, step_size)
        }
        AlgorithmKind::PlainLms { .. } => Err(Error::invalid(
            "no steady-state predictor for the plain LMS baseline",
        )),
    }
}
