use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Syntax-level failure while reading an input file.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    /// Input parsed but violates a model invariant.
    #[error("{location}: {message}")]
    Validation { location: String, message: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("{what} has {size} elements, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("{0}")]
    NonConvergence(String),

    /// Arithmetic breakdown (NaN energies, singular denominators).
    #[error("{0}")]
    Numerical(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    ResourceCap,
    NonConvergence,
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::CapExceeded { .. } => ErrorCategory::ResourceCap,
            Error::NonConvergence(_) | Error::Numerical(_) => ErrorCategory::NonConvergence,
            _ => ErrorCategory::Input,
        }
    }
}
