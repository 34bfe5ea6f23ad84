use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("truncation error: tail population {tail:.3e} beyond dimension {dim}")]
    Truncation { tail: f64, dim: usize },

    #[error("interior accuracy violated: {0}")]
    InteriorViolation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("filter starvation: success probability {probability:.3e} below 1e-12")]
    FilterStarvation { probability: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrator step violation: {0}")]
    StepSize(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("toy model breakdown: lambda2 = {lambda2:.4} >= 1 at N = {n}")]
    ModelBreakdown { n: u32, lambda2: f64 },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("no dominant spectral peak above the noise floor")]
    NoPeak,

    #[error("too few data points: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("bootstrap refits failed in {failed} of {total} resamples")]
    BootstrapFailures { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
