use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the workbench library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (bad gram order, zero
    /// weights, cutoff larger than the run, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input data is malformed or inconsistent. `location` names the file
    /// (and line or byte offset when known) or the logical record.
    #[error("{location}: {message}")]
    Data { location: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }

    pub(crate) fn data(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
