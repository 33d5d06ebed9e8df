//! Weight-update rules of the non-negative LMS family.
//!
//! All rules share the error signal `e(n) = y(n) - w'(n) x(n)` and differ in
//! the correction applied to each tap:
//!
//! ```text
//! NNLMS                w_i += eta * w_i * e * x_i
//! Normalized NNLMS     w_i += eta / (x'x + eps) * w_i * e * x_i
//! Exponential NNLMS    w_i += eta * sgn(w_i)|w_i|^gamma * e * x_i
//! Sign-Sign NNLMS      w_i += eta * w_i * sgn(x_i * e)
//! plain LMS            w_i += eta * e * x_i
//! ```
//!
//! The four non-negative rules scale the correction by the weight itself (or
//! a signed power of it), which makes zero an absorbing state per tap and
//! steers the filter toward the non-negative constraint set. `sgn(0) = 0`
//! everywhere, so absorption also holds for the sign-sign rule.
//!
//! Updates are pure functions of `(state, sample)`; many filters can run in
//! parallel without shared mutable state.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::signal::SamplePair;

/// Update rule plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmKind {
    Nnlms {
        step_size: f64,
    },
    NormalizedNnlms {
        step_size: f64,
        regularizer: f64,
    },
    ExponentialNnlms {
        step_size: f64,
        exponent: f64,
    },
    SignSignNnlms {
        step_size: f64,
    },
    /// Unconstrained baseline; has no zero-absorption.
    PlainLms {
        step_size: f64,
    },
}

impl AlgorithmKind {
    /// Checks parameter ranges. A zero step size is allowed and freezes the
    /// filter, which is useful as a diagnostic reference.
    pub fn validate(&self) -> Result<()> {
        let step = self.step_size();
        if !step.is_finite() || step < 0.0 {
            return Err(Error::invalid(format!(
                "step size must be finite and >= 0, got {step}"
            )));
        }
        match *self {
            AlgorithmKind::NormalizedNnlms { regularizer, .. }
                if !regularizer.is_finite() || regularizer < 0.0 =>
            {
                Err(Error::invalid(format!(
                    "regularizer must be finite and >= 0, got {regularizer}"
                )))
            }
            AlgorithmKind::ExponentialNnlms { exponent, .. }
                if !exponent.is_finite() || exponent <= 0.0 || exponent > 1.0 =>
            {
                Err(Error::invalid(format!(
                    "exponent must lie in (0, 1], got {exponent}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn step_size(&self) -> f64 {
        match *self {
            AlgorithmKind::Nnlms { step_size }
            | AlgorithmKind::NormalizedNnlms { step_size, .. }
            | AlgorithmKind::ExponentialNnlms { step_size, .. }
            | AlgorithmKind::SignSignNnlms { step_size }
            | AlgorithmKind::PlainLms { step_size } => step_size,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Nnlms { .. } => "nnlms",
            AlgorithmKind::NormalizedNnlms { .. } => "normalized-nnlms",
            AlgorithmKind::ExponentialNnlms { .. } => "exponential-nnlms",
            AlgorithmKind::SignSignNnlms { .. } => "sign-sign-nnlms",
            AlgorithmKind::PlainLms { .. } => "plain-lms",
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adaptive filter state: current weights, the rule that evolves them, and
/// the number of updates applied so far.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    weights: Vec<f64>,
    kind: AlgorithmKind,
    iteration: u64,
}

impl FilterState {
    pub fn new(kind: AlgorithmKind, initial_weights: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        if initial_weights.is_empty() {
            return Err(Error::invalid("filter needs at least one tap"));
        }
        if !initial_weights.iter().all(|w| w.is_finite()) {
            return Err(Error::invalid("initial weights must be finite"));
        }
        Ok(Self {
            weights: initial_weights,
            kind,
            iteration: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> &AlgorithmKind {
        &self.kind
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Estimation error `e(n) = desired - weights' regressor`.
    pub fn predict_error(&self, sample: &SamplePair) -> Result<f64> {
        if sample.regressor.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "regressor length {} does not match filter order {}",
                sample.regressor.len(),
                self.weights.len()
            )));
        }
        Ok(sample.desired - dot(&self.weights, &sample.regressor))
    }

    /// Applies one update in place and returns the pre-update error `e(n)`.
    ///
    /// If any weight becomes non-finite the state is poisoned and a
    /// [`Error::Divergence`] carrying the failing iteration is returned;
    /// the state must be discarded afterwards.
    pub fn update_in_place(&mut self, sample: &SamplePair) -> Result<f64> {
        let error = self.predict_error(sample)?;
        let x = &sample.regressor;
        match self.kind {
            AlgorithmKind::Nnlms { step_size } => {
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    *w += step_size * *w * error * xi;
                }
            }
            AlgorithmKind::NormalizedNnlms {
                step_size,
                regularizer,
            } => {
                let denom = dot(x, x) + regularizer;
                if denom <= 0.0 {
                    return Err(Error::invalid(
                        "normalized update needs x'x + regularizer > 0",
                    ));
                }
                let gain = step_size / denom;
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    *w += gain * *w * error * xi;
                }
            }
            AlgorithmKind::ExponentialNnlms {
                step_size,
                exponent,
            } => {
                if exponent == 1.0 {
                    // Same arithmetic as the multiplicative rule, so the
                    // exponent-one reduction is exact to the bit.
                    for (w, &xi) in self.weights.iter_mut().zip(x) {
                        *w += step_size * *w * error * xi;
                    }
                } else {
                    for (w, &xi) in self.weights.iter_mut().zip(x) {
                        let graded = sgn(*w) * w.abs().powf(exponent);
                        *w += step_size * graded * error * xi;
                    }
                }
            }
            AlgorithmKind::SignSignNnlms { step_size } => {
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    *w += step_size * *w * sgn(xi * error);
                }
            }
            AlgorithmKind::PlainLms { step_size } => {
                for (w, &xi) in self.weights.iter_mut().zip(x) {
                    *w += step_size * error * xi;
                }
            }
        }
        let n = self.iteration;
        self.iteration += 1;
        if let Some(tap) = self.weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Divergence {
                iteration: n,
                tap,
                value: self.weights[tap],
            });
        }
        Ok(error)
    }

    /// Pure update: returns the successor state with `iteration + 1`.
    pub fn update(&self, sample: &SamplePair) -> Result<FilterState> {
        let mut next = self.clone();
        next.update_in_place(sample)?;
        Ok(next)
    }
}
