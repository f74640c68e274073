use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("index error: {0}")]
    Index(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("solver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("batch {batch} failed: {source}")]
    Batch {
        batch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("configuration recovery failed: {0}")]
    Recovery(String),

    #[error("all abscissae identical; linear fit is undetermined")]
    DegenerateAbscissa,

    #[error("overlap regularization failed: {0}")]
    Regularization(String),

    #[error("cluster size error: {0}")]
    ClusterSize(String),

    #[error("missing data for species `{species}` and method `{method}`")]
    MissingData { species: String, method: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for solver non-convergence, possibly wrapped in batch context.
    pub fn is_convergence(&self) -> bool {
        match self {
            Error::Convergence { .. } => true,
            Error::Batch { source, .. } => source.is_convergence(),
            _ => false,
        }
    }
}
