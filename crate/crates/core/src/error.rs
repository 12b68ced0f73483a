use thiserror::Error;

/// Errors raised by the discretization, solver and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("index out of range: {what} {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("sub-cell averaging is not injective on degree-{p} polynomials with {n} sub-cells (smin/smax = {ratio:.3e})")]
    NonInjective { p: usize, n: usize, ratio: f64 },

    #[error("penalty parameter must be non-negative, got {0}")]
    NegativePenalty(f64),

    #[error("inadmissible state in element {element} at x = {x}: {reason}")]
    Inadmissible {
        element: usize,
        x: f64,
        reason: String,
    },

    #[error("non-finite coefficients after step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidMesh(_) | Error::NegativePenalty(_) => 2,
            Error::Inadmissible { .. } | Error::NonFinite { .. } => 3,
            Error::NonInjective { .. } => 4,
            Error::IndexOutOfRange { .. } | Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
