use thiserror::Error;

/// Errors raised by distribution constructors, operations and filters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("distribution has no probability density function")]
    NoDensity,

    #[error("circular mean is undefined (first moment has zero length)")]
    UndefinedMean,

    #[error("quadrature did not converge (best estimate {estimate})")]
    NonConvergence { estimate: f64 },

    #[error("iteration did not converge after {iterations} iterations")]
    IterationLimit { iterations: usize },

    #[error("inadmissible input: {0}")]
    Inadmissible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// The best available estimate carried by a quadrature failure.
    pub fn best_estimate(&self) -> Option<f64> {
        match self {
            Error::NonConvergence { estimate } => Some(*estimate),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
