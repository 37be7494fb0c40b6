use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes of the command-line tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Parse = 2,
    Oracle = 3,
    Internal = 4,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Open { path: PathBuf, source: io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Syntax { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("transport error on ({first}, {second}): {message}")]
    Transport { first: String, second: String, message: String },
    #[error("endpoint returned HTTP {status}: {body}")]
    Protocol { status: u16, body: String },
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            Error::Usage(_) | Error::Open { .. } => ExitStatus::Usage,
            Error::Syntax { .. } | Error::Format { .. } => ExitStatus::Parse,
            Error::Transport { .. } | Error::Protocol { .. } | Error::Oracle(_) => {
                ExitStatus::Oracle
            }
            Error::Invariant(_) | Error::Io(_) => ExitStatus::Internal,
        }
    }

    pub(crate) fn open(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Open { path: path.into(), source }
    }
}

impl From<std::convert::Infallible> for Error {
    fn from(e: std::convert::Infallible) -> Self {
        match e {}
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
