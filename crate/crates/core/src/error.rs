use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// `Contract` covers every precondition violation (bad dimensions, invalid
/// configuration, malformed input documents). `Io` is reserved for file
/// system failures so front ends can map the two onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller rather than the environment.
    pub fn is_contract(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::UnsupportedDimension(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Contract(format!("malformed json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Contract(msg()))
    }
}
