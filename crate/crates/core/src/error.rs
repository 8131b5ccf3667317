use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the factorization, sketching and skeletonization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("contract violation: {0}")]
    Contract(String),

    /// All pivot candidates in the active column were exactly zero.
    #[error("rank deficient: zero pivot column at elimination step {step}")]
    RankDeficient { step: usize },

    #[error("singular triangular factor: zero diagonal entry at index {index}")]
    Singular { index: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error in {structure} at byte offset {offset}: {message}")]
    Parse {
        structure: &'static str,
        offset: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
