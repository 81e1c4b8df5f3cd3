//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shape or dimension mismatch; the message names the offending shapes.
    #[error("shape error: {0}")]
    Shape(String),

    /// A numeric precondition failed (bad hyperparameter, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Training aborted because the loss left the finite range.
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// A metric is undefined for the given input (constant series, single class, ...).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Dataset construction or ingestion failure.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// Checkpoint or manifest (de)serialization failure.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn dataset(msg: impl Into<String>) -> Self {
        Error::Dataset(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
