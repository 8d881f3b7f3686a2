//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameter or inconsistent input shapes.
    #[error("validation: {0}")]
    Validation(String),

    /// Unknown corruption id, malformed plan, bad severity table, etc.
    #[error("configuration: {0}")]
    Config(String),

    /// Malformed file payload; `offset` is the byte where parsing failed.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("io: {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// Loss went NaN/Inf during training.
    #[error("training diverged at epoch {epoch}, step {step}")]
    Diverged { epoch: usize, step: usize },

    /// Robustness or CE score with a zero reference.
    #[error("undefined score: {0}")]
    UndefinedScore(String),

    /// A cache entry exists but cannot be decoded.
    #[error("corrupt cache entry {key}: {message}")]
    CacheCorrupt { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(offset: u64, msg: impl Into<String>) -> Self {
        Error::Parse { offset, message: msg.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// True for errors caused by bad user input rather than runtime failure.
    /// The CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Config(_) | Error::Parse { .. }
        )
    }
}
