//! Non-negative LMS adaptive filtering laboratory.
//!
//! Building blocks for system identification under non-negativity
//! constraints:
//!
//! * [`signal`] - the unknown linear system, stationary AR(1) input, and
//!   fully seeded sample streams;
//! * [`filters`] - the multiplicative, normalized, exponential, and
//!   sign-sign non-negative update rules plus a plain LMS baseline;
//! * [`theory`] - input correlation matrices, support classification, and
//!   closed-form steady-state EMSE predictions;
//! * [`nnls`] - the active-set solver for the constrained mean weights;
//! * [`ensemble`] - seeded, reproducible Monte Carlo ensembles and
//!   theory-versus-simulation comparison.
//!
//! All randomness is deterministic given the configured seeds; see
//! [`rng`] for the generator contract.

pub mod ensemble;
pub mod error;
pub mod filters;
mod linalg;
pub mod nnls;
pub mod rng;
pub mod signal;
pub mod theory;

pub use ensemble::{compare, run_ensemble, ComparisonReport, EnsembleResult, ExperimentConfig};
pub use error::{Error, Result};
pub use filters::{AlgorithmKind, FilterState};
pub use nnls::{kkt_report, nonnegative_quadratic_min, solve_constrained_wiener, KktReport};
pub use signal::{generate_ar1, stream_samples, Ar1Process, SamplePair, SampleStream, SystemModel};
pub use theory::{
    build_correlation, classify_support, default_support_threshold, emse_bias_term, predict_emse,
    predict_emse_exponential, predict_emse_nnlms, predict_emse_normalized, predict_emse_signsign,
    CorrelationModel, SteadyStatePrediction, SupportPartition,
};
