use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("singular matrix: pivot magnitude {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("no nonsingular block scaling found after {0} attempts")]
    DegenerateScaling(usize),

    #[error("orthogonal completion stayed rank deficient after {0} attempts")]
    DegenerateCompletion(usize),

    #[error("no mixing matrix with condition number below {limit:e} after {attempts} draws")]
    DegenerateMixing { limit: f64, attempts: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("reference signal has zero energy")]
    ZeroReference,

    #[error("no convergence after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("{failed} of {trials} trials failed numerically")]
    FailureRateExceeded { failed: usize, trials: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
