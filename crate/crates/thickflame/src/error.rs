//! Error type shared across the crate.

use thiserror::Error;

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("mode {k} is cut off: 1 - theta_i R X_k(0) = {margin:.3e} <= 0")]
    ModeCutoff { k: usize, margin: f64 },

    #[error("no sign change of the dispersion relation on [{lo:.6e}, {hi:.6e}] (le = {le})")]
    Bracket { lo: f64, hi: f64, le: f64 },

    #[error("second derivative of the traveling wave is two-valued at x = {x}; choose a side")]
    AmbiguousDerivative { x: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },

    #[error("singular boundary system for mode {mode} (condition number {cond:.3e})")]
    SingularBoundary { mode: usize, cond: f64 },

    #[error("blow-up at t = {t:.6e}: max |field| = {max:.3e}")]
    BlowUp { t: f64, max: f64 },

    #[error("degenerate denominator {what} at y index {index}: {value:.3e}")]
    Degenerate {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("amplitudes span {decades:.3} decades, need at least one")]
    NoGrowth { decades: f64 },

    #[error("too few samples: {got} (need {need})")]
    TooFewSamples { got: usize, need: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 for failed validation or bad input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::Config(_)
            | Error::Validation(_)
            | Error::MissingArtifact(_) => 1,
            _ => 2,
        }
    }
}
