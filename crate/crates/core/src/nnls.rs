//! Non-negativity-constrained quadratic minimization.
//!
//! Solves `min_w (w - t)' R (w - t)  subject to  w >= 0` for symmetric
//! positive definite `R` with an active-set method in the style of
//! Lawson-Hanson, working directly on the normal equations:
//!
//! 1. start at `w = 0` with an empty passive (free) set;
//! 2. move the coordinate with the most positive dual `b - R w` (where
//!    `b = R t`) into the passive set;
//! 3. solve the equality-constrained problem on the passive set,
//!    `R_PP s_P = b_P`, via Cholesky;
//! 4. if the sub-solution goes non-positive anywhere, step only as far as
//!    the first coordinate that hits zero, drop it from the passive set,
//!    and re-solve;
//! 5. stop when every non-passive dual is non-positive.
//!
//! At exit the passive weights satisfy the stationarity condition to solver
//! precision and every clamped weight has a non-negative gradient, which is
//! exactly the KKT system of the constrained problem. Entries outside the
//! passive set are exact zeros.

use crate::error::{Error, Result};
use crate::signal::SystemModel;
use crate::theory::CorrelationModel;

/// KKT residuals of a candidate solution for
/// `min (w - t)' R (w - t), w >= 0`, using gradient `g = 2 R (w - t)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KktReport {
    /// Most negative weight (0 when all weights are feasible).
    pub primal_violation: f64,
    /// Largest `|g_i|` over weights that are strictly positive.
    pub stationarity_residual: f64,
    /// Largest `max(0, -g_i)` over weights that are zero.
    pub dual_violation: f64,
    /// Maximum of the three violations.
    pub max_violation: f64,
}

/// Evaluates KKT residuals of `weights` for the constrained problem defined
/// by `corr` and `target`. Weights at or below `zero_threshold` are treated
/// as clamped.
pub fn kkt_report(
    corr: &CorrelationModel,
    target: &[f64],
    weights: &[f64],
    zero_threshold: f64,
) -> Result<KktReport> {
    let n = corr.order();
    if target.len() != n || weights.len() != n {
        return Err(Error::invalid(format!(
            "kkt_report needs {n}-vectors, got target {} and weights {}",
            target.len(),
            weights.len()
        )));
    }
    let diff: Vec<f64> = weights.iter().zip(target).map(|(w, t)| w - t).collect();
    let gradient: Vec<f64> = corr.multiply(&diff).iter().map(|g| 2.0 * g).collect();
    // Strict comparisons keep the accumulators at +0.0 when nothing violates.
    fn raise(acc: &mut f64, candidate: f64) {
        if candidate > *acc {
            *acc = candidate;
        }
    }
    let mut primal: f64 = 0.0;
    let mut stationarity: f64 = 0.0;
    let mut dual: f64 = 0.0;
    for i in 0..n {
        raise(&mut primal, -weights[i]);
        if weights[i] > zero_threshold {
            raise(&mut stationarity, gradient[i].abs());
        } else {
            raise(&mut dual, -gradient[i]);
        }
    }
    Ok(KktReport {
        primal_violation: primal,
        stationarity_residual: stationarity,
        dual_violation: dual,
        max_violation: primal.max(stationarity).max(dual),
    })
}

/// Mean steady-state weights of the constrained problem: the minimizer of
/// the excess error quadratic over the non-negative orthant.
pub fn solve_constrained_wiener(model: &SystemModel, corr: &CorrelationModel) -> Result<Vec<f64>> {
    if model.order() != corr.order() {
        return Err(Error::invalid(format!(
            "system order {} does not match correlation order {}",
            model.order(),
            corr.order()
        )));
    }
    nonnegative_quadratic_min(corr, model.true_weights())
}

/// Active-set solver for `min (w - target)' R (w - target), w >= 0`.
pub fn nonnegative_quadratic_min(corr: &CorrelationModel, target: &[f64]) -> Result<Vec<f64>> {
    let n = corr.order();
    if target.len() != n {
        return Err(Error::invalid(format!(
            "target length {} does not match correlation order {n}",
            target.len()
        )));
    }
    if !target.iter().all(|t| t.is_finite()) {
        return Err(Error::invalid("target must be finite"));
    }

    let b = corr.multiply(target);
    let mut weights = vec![0.0_f64; n];
    let mut passive = vec![false; n];
    // Entry tolerance scaled to the dual's magnitude; keeps the final
    // clamped-set gradients comfortably inside the 1e-10 KKT budget.
    let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let entry_tol = 1e-12 * scale;

    let max_swaps = 10 * n;
    let mut swaps = 0;

    loop {
        let residual = corr.multiply(&weights);
        let mut entering: Option<(usize, f64)> = None;
        for i in 0..n {
            if passive[i] {
                continue;
            }
            let dual = b[i] - residual[i];
            if dual > entry_tol && entering.is_none_or(|(_, best)| dual > best) {
                entering = Some((i, dual));
            }
        }
        let Some((enter, _)) = entering else {
            break;
        };
        passive[enter] = true;
        swaps += 1;
        if swaps > max_swaps {
            return Err(Error::NoConvergence { max_swaps });
        }

        loop {
            let trial = solve_on_support(corr, &b, &passive)?;
            let feasible = (0..n).filter(|&i| passive[i]).all(|i| trial[i] > 0.0);
            if feasible {
                weights = trial;
                break;
            }
            // Step from `weights` toward `trial` until the first passive
            // coordinate reaches zero, then release it.
            let mut step = f64::INFINITY;
            let mut blocker = usize::MAX;
            for i in 0..n {
                if passive[i] && trial[i] <= 0.0 {
                    let t = weights[i] / (weights[i] - trial[i]);
                    if t < step {
                        step = t;
                        blocker = i;
                    }
                }
            }
            for i in 0..n {
                if passive[i] {
                    weights[i] += step * (trial[i] - weights[i]);
                }
            }
            weights[blocker] = 0.0;
            passive[blocker] = false;
            for i in 0..n {
                if passive[i] && weights[i] <= 0.0 {
                    weights[i] = 0.0;
                    passive[i] = false;
                }
            }
            swaps += 1;
            if swaps > max_swaps {
                return Err(Error::NoConvergence { max_swaps });
            }
        }
    }
    Ok(weights)
}

/// Solves `R_PP s_P = b_P` on the passive set and scatters into a full
/// vector with exact zeros elsewhere.
fn solve_on_support(corr: &CorrelationModel, b: &[f64], passive: &[bool]) -> Result<Vec<f64>> {
    let support: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let p = support.len();
    let mut sub = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for (r, &i) in support.iter().enumerate() {
        rhs[r] = b[i];
        for (c, &j) in support.iter().enumerate() {
            sub[r * p + c] = corr.entry(i, j);
        }
    }
    cholesky_solve_in_place(&mut sub, &mut rhs, p)?;
    let mut full = vec![0.0; passive.len()];
    for (r, &i) in support.iter().enumerate() {
        full[i] = rhs[r];
    }
    Ok(full)
}

/// Cholesky factorization and solve for a dense SPD system, row-major.
/// Fails with invalid-argument if a pivot is not strictly positive.
fn cholesky_solve_in_place(matrix: &mut [f64], rhs: &mut [f64], n: usize) -> Result<()> {
    // Lower factor written into the lower triangle.
    for k in 0..n {
        let mut pivot = matrix[k * n + k];
        for j in 0..k {
            pivot -= matrix[k * n + j] * matrix[k * n + j];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::invalid(
                "correlation matrix is not positive definite",
            ));
        }
        let pivot = pivot.sqrt();
        matrix[k * n + k] = pivot;
        for i in k + 1..n {
            let mut v = matrix[i * n + k];
            for j in 0..k {
                v -= matrix[i * n + j] * matrix[k * n + j];
            }
            matrix[i * n + k] = v / pivot;
        }
    }
    // Forward substitution L y = rhs.
    for i in 0..n {
        let mut v = rhs[i];
        for j in 0..i {
            v -= matrix[i * n + j] * rhs[j];
        }
        rhs[i] = v / matrix[i * n + i];
    }
    // Back substitution L' x = y.
    for i in (0..n).rev() {
        let mut v = rhs[i];
        for j in i + 1..n {
            v -= matrix[j * n + i] * rhs[j];
        }
        rhs[i] = v / matrix[i * n + i];
    }
    Ok(())
}
