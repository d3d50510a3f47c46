use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation.
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("invalid argument `{name}`: {reason}")]
    Argument { name: &'static str, reason: String },

    /// A resource index was outside the pool serving the hop.
    #[error("resource index {index} outside pool of {pool} on link {link}")]
    Grant { link: usize, index: u32, pool: usize },

    /// A radio hop carries zero aggregate rate.
    #[error("link {link} has zero aggregate rate")]
    InfeasibleLink { link: usize },

    /// Processing was requested on a unit without compute power.
    #[error("unit {unit} cannot process tasks")]
    InvalidUnit { unit: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn argument(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Argument {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad configuration rather than the environment.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Json(_) | Error::Argument { .. })
    }

    /// True for file system failures, including those surfaced by the CSV writer.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(c) => matches!(c.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
