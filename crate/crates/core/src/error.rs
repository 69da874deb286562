use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Counts or dimensions of two inputs do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Non-finite, ragged or otherwise unusable user data.
    #[error("data error: {0}")]
    Data(String),

    /// A user-supplied grid violates the grid invariants.
    #[error("invalid grid: {reason} (point {index})")]
    Grid { index: usize, reason: String },

    /// A request exceeds a fixed table or size limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {path} at row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    /// A cached null table does not describe the requested test.
    #[error("null table metadata mismatch: {0}")]
    Metadata(String),

    #[error("corrupt null table: {0}")]
    CorruptTable(String),

    /// A provably nonnegative quantity came out negative, or a similar
    /// internal invariant broke.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Capacity(_) => 2,
            Error::Internal(_) => 4,
            _ => 3,
        }
    }
}
