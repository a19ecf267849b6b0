use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the detection pipeline and its evaluation tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("referenced image files are missing: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingImages(Vec<PathBuf>),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cannot build a TF-IDF model from an empty document collection")]
    EmptyCollection,

    #[error("unknown report `{0}`")]
    UnknownReport(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("query has no ground-truth duplicates")]
    EmptyGroundTruth,

    #[error("project `{0}` has no eligible query (no report with a duplicate)")]
    NoEligibleQuery(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible generator spec: {0}")]
    Spec(String),

    #[error("feature store: {0}")]
    Store(String),

    #[error("feature store version mismatch: {0}")]
    StoreVersion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
