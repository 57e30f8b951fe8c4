//! Crate-wide error type.

use crate::timeline::Frame;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty interval [{start}, {end}): start must be strictly less than end")]
    EmptyInterval { start: Frame, end: Frame },

    #[error("interval [{start}, {end}) lies outside [0, {horizon})")]
    OutOfBounds {
        start: Frame,
        end: Frame,
        horizon: Frame,
    },

    #[error("horizon must be a positive frame count")]
    ZeroHorizon,

    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: Frame, right: Frame },

    #[error("parse error at line {line}: {message}")]
    ParseAt { line: u64, message: String },

    #[error("parse error: {message}")]
    Parse { message: String },

    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            message: message.into(),
        }
    }

    pub fn parse_at(line: u64, message: impl Into<String>) -> Self {
        Error::ParseAt {
            line,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    /// True for malformed-input errors, false for invariant breaches.
    /// The CLI maps the former to exit code 2 and the latter to 3.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::ParseAt { .. })
    }
}
