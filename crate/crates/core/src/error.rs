use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the encoding, learning, and dataset layers.
#[derive(Debug, Error)]
pub enum HpsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error in {path}: {message} (at byte offset {offset})")]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("malformed data: {0}")]
    Data(String),

    #[error("no classification possible: {0}")]
    NoClassification(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HpsError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        HpsError::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HpsError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 1 usage, 2 data-format, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            HpsError::InvalidInput(_) | HpsError::Config(_) => 1,
            HpsError::Format { .. }
            | HpsError::Data(_)
            | HpsError::Io { .. }
            | HpsError::Json(_)
            | HpsError::NoClassification(_) => 2,
            HpsError::Invariant(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HpsError>;
