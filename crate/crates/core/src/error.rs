use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("non-finite gradient at leapfrog step {step}")]
    IntegrationFailure { step: usize },

    #[error("non-finite log-density at the starting state")]
    NonFiniteStart,

    #[error("iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("factorization failed: {0}")]
    Factorization(&'static str),

    #[error("truncation rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("degenerate series: zero variance")]
    DegenerateSeries,

    #[error("series too short: need at least {needed} samples, have {found}")]
    SeriesTooShort { needed: usize, found: usize },

    #[error("reference has zero norm")]
    ZeroNorm,

    #[error("no high-fidelity evaluations recorded")]
    NoHfEvaluations,

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Chain {
            iteration,
            source: Box::new(self),
        }
    }
}
