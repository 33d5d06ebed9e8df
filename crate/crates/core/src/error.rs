//! Error types shared across the crate.

/// Errors produced by signal generation, filtering, theory, and ensembles.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A weight update produced a non-finite coefficient. The filter state
    /// is unusable afterwards and must be discarded.
    #[error("filter diverged at iteration {iteration}: weight {tap} became {value}")]
    Divergence {
        iteration: u64,
        tap: usize,
        value: f64,
    },

    /// The active-set solver exceeded its swap budget.
    #[error("active-set solver did not converge within {max_swaps} swaps")]
    NoConvergence { max_swaps: usize },

    /// The steady-state expression is outside its validity region: the
    /// denominator 2 - eta * trace term is not positive.
    #[error(
        "predicted instability: step size {step_size} leaves stability margin {margin} <= 0"
    )]
    PredictedInstability { step_size: f64, margin: f64 },

    /// Every run of an ensemble diverged, so no statistics exist.
    #[error("ensemble failure: all {runs} runs diverged")]
    EnsembleFailure { runs: usize },
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
