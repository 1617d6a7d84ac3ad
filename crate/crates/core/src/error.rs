use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by data ingestion, model fitting and experiment execution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Input file does not follow the expected binary or text layout.
    #[error("format error: {0}")]
    Format(String),

    /// Two inputs that must agree (e.g. image and label counts) do not.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A solve needed full rank but a retained singular value fell below the cutoff.
    #[error(
        "singular design: singular value #{index} = {value:e} is below tolerance {tolerance:e}"
    )]
    Singular {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    /// A sweep schedule point is infeasible; raised before any fitting happens.
    #[error("schedule point {index} is infeasible: {reason}")]
    Schedule { index: usize, reason: String },

    /// A model handed to a routine does not satisfy its precondition.
    #[error("precondition violated by {model}: {reason}")]
    Precondition { model: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numbers themselves rather than by
    /// malformed input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
