use crate::kernels::ValidationReport;
use crate::measures::Distribution;
use thiserror::Error;

/// Errors surfaced by the analysis operations.
///
/// Kernel *violations* are data (see [`ValidationReport`]); an `Error` means
/// an operation could not produce a meaningful result.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("not a probability vector: {reason}")]
    InvalidDistribution { reason: String },

    #[error("simplex grid would hold {count} points, exceeding the cap of {cap}")]
    GridCapExceeded { count: u128, cap: u64 },

    #[error("search would evaluate {pairs} grid pairs, exceeding the cap of {cap}")]
    EvalCapExceeded { pairs: u128, cap: u64 },

    #[error("invalid kernel:\n{report}")]
    InvalidKernel { report: ValidationReport },

    #[error("gamma = {gamma} outside the admissible range ({low}, {high}) for {example}")]
    GammaOutOfRange {
        example: &'static str,
        gamma: f64,
        low: f64,
        high: f64,
    },

    #[error(
        "theorem hypotheses {} hold: lambda2 = {lambda2} vs alpha2 = {alpha2}",
        if *.certified { "certifiably do not" } else { "could not be certified to" }
    )]
    HypothesisFailure {
        lambda2: f64,
        alpha2: f64,
        /// True when even the optimistic bracket ends violate `λ₂ ≤ α₂`.
        certified: bool,
    },

    #[error("no convergence after {iterations} iterations (last TV delta {last_delta:.3e})")]
    NonConvergence {
        iterations: usize,
        last_delta: f64,
        last_iterate: Distribution,
    },

    #[error("coefficient reports do not describe the same kernel")]
    ReportMismatch,

    #[error(
        "law-sensitivity bound {bound} violated on a sampled pair (observed slope {observed})"
    )]
    LipschitzBoundViolated { bound: f64, observed: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
