use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched sizes, invalid settings, or an inconsistent problem/sampler combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A non-finite value appeared where a finite one is required.
    #[error("numeric error: {message} ({context})")]
    Numeric { message: String, context: String },

    /// An argument outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(message: impl Into<String>, context: impl Into<String>) -> Self {
        Error::Numeric { message: message.into(), context: context.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }

    /// Attaches extra context to a numeric error; other variants pass through.
    pub fn with_context(self, extra: impl std::fmt::Display) -> Self {
        match self {
            Error::Numeric { message, context } => Error::Numeric { message, context: format!("{context}; {extra}") },
            other => other,
        }
    }
}
