use std::io;
use std::path::PathBuf;

/// Errors produced by the estimators, simulators and file readers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("x and y have different lengths ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("tail count {name}={value} out of range for n={n}: {reason}")]
    TailCount {
        name: &'static str,
        value: usize,
        n: usize,
        reason: &'static str,
    },

    #[error("Hill threshold X_(n-k1,n) = {value} is not positive")]
    NonPositiveThreshold { value: f64 },

    #[error("extreme level p={p} exceeds the intermediate level k/n={k}/{n}")]
    InwardExtrapolation { p: f64, k: usize, n: usize },

    #[error("eta estimate {0} is not positive")]
    NonPositiveEta(f64),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integral does not converge: {0}")]
    Divergent(String),

    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("too few tail observations: need {needed}, got {got}")]
    InsufficientTail { needed: usize, got: usize },

    #[error("{failed} of {total} replications failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("{stage}: {source}")]
    Estimator {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Estimator {
            stage,
            source: Box::new(source),
        }
    }

    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Innermost error, skipping estimator attribution wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Estimator { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
