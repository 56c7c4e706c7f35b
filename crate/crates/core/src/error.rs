use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("delay at slot {slot} is {delay}, but feedback must arrive by slot {horizon}")]
    DelayPastHorizon {
        slot: usize,
        delay: usize,
        horizon: usize,
    },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("loss {0} is outside [0, 1]")]
    LossOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no stored distribution for origin slot {0}")]
    MissingStoredDistribution(usize),

    #[error("one-point estimator cannot consume delayed feedback (origin {origin}, arrival {arrival})")]
    DelayedOnePointFeedback { origin: usize, arrival: usize },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("I/O error on {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("solver did not converge within {iterations} iterations (gradient-map norm {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("nothing to plot")]
    EmptyPlot,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
