//! Error type shared across the crate.

use std::fmt;

/// Errors produced by construction, parsing, and analysis routines.
#[derive(Debug)]
pub enum Error {
    /// An input failed structural validation (dimension, range, or semantic
    /// constraints).
    Validation(String),
    /// A file or string was syntactically malformed.
    Parse(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// Two redundant computation paths disagreed; this indicates a bug and
    /// results must not be trusted.
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
            Error::Inconsistency(msg) => write!(f, "internal consistency error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
