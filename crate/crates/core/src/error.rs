use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the scoring lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error in column `{column}`: {reason}")]
    Schema { column: String, reason: String },

    #[error("parse error at data row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("unsupported model document: {0}")]
    VersionedFormat(String),

    #[error("malformed JSON document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Degenerate,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::VersionedFormat(_) | Error::Json(_) => {
                ErrorKind::Config
            }
            Error::DegenerateLabels(_) => ErrorKind::Degenerate,
            Error::Schema { .. }
            | Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::UndefinedCorrelation(_)
            | Error::Io { .. } => ErrorKind::Data,
        }
    }

    /// Exit code contract of the CLI: 2 configuration, 3 data, 4 training degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Degenerate => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
