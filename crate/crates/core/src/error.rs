use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LrscError>;

#[derive(Debug, Error)]
pub enum LrscError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("numeric factorization failed: {0}")]
    Numeric(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("configuration error: {0}")]
    Config(String),
}

impl LrscError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LrscError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        LrscError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
