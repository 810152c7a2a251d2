use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the preconditioning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for {n} variables")]
    Index { index: usize, n: usize },

    #[error("{what} needs {required} qubits, above the cap of {cap}")]
    Capacity {
        what: String,
        required: usize,
        cap: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("problem has no interaction terms")]
    EmptyProblem,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Wraps the error with a description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True when the error stems from bad input data rather than bad arguments.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Integrity(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::EmptyProblem
            | Error::Numeric(_) => true,
            Error::Context { source, .. } => source.is_data_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
