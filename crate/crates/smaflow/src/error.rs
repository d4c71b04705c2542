use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors of the IO layer and the commands built on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("{path}: {kind}")]
    Snapshot { path: PathBuf, kind: SnapshotError },

    #[error("{path}: {message}")]
    Timeseries { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] smaflow_core::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnapshotError {
    #[error("not a snapshot (expected magic `SMAFLOW1`)")]
    BadMagic,
    #[error("malformed header: {0}")]
    Header(String),
    #[error("payload holds {actual} bytes, header implies {expected}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("non-finite value in field `{field}` at index {index}")]
    NonFinite { field: &'static str, index: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
