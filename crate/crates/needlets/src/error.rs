use std::path::PathBuf;

use crate::binary::DecodeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the IO layer. All of them are input or usage errors as far
/// as the command line is concerned.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A text input file did not parse or violated a precondition.
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: needlets_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Decode {
        path: PathBuf,
        #[source]
        source: DecodeError,
    },
    #[error(transparent)]
    Core(#[from] needlets_core::Error),
    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
