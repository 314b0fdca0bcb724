use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (unknown product, negative demand, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent configuration: shapes, missing weeks, invalid parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// The operation was called in a state where it does not apply.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("training diverged at episode {episode}: {message}")]
    Training { episode: usize, message: String },

    /// Exact enumeration was asked for more players than the guard allows.
    #[error(
        "exact Shapley enumeration refused: {features} features exceeds the limit of {limit}; \
         group features or use deep_shap instead"
    )]
    TooManyFeatures { features: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }
}
