use thiserror::Error;

/// Errors produced by graph ingestion, estimators, and selection routines.
///
/// The variants map onto the CLI exit-code contract: `Parse`, `Data`, and
/// `Io` are data errors (exit 2), `CapExceeded` is exit 3, and
/// `InvalidParam` is a usage error (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    CapExceeded(String),

    #[error("{0}")]
    InvalidParam(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code under the CLI contract: 1 usage, 2 data, 3 cap.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidParam(_) => 1,
            Error::Parse { .. } | Error::Data(_) | Error::Io(_) => 2,
            Error::CapExceeded(_) => 3,
        }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded(msg.into())
    }
}
