use std::path::PathBuf;

use decayreach_core::dataset::DatasetError;
use decayreach_core::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("invalid dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("invalid parameters: {0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Invalid(String),
    #[error("query failed: {0}")]
    Query(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

impl<E: std::fmt::Display> From<decayreach_core::query::QueryError<E>> for Error {
    /// Index read failures are data errors; everything else is a bad request.
    fn from(e: decayreach_core::query::QueryError<E>) -> Self {
        match e {
            decayreach_core::query::QueryError::Source(_) => Error::Query(e.to_string()),
            _ => Error::Invalid(e.to_string()),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
