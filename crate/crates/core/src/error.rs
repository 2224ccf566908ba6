use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("grid incompatibility: {0}")]
    GridIncompatible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite coefficient at (k={k}, j={j})")]
    NonFinite { k: i64, j: i64 },

    #[error("CFL violation: requested dt={requested:.3e}, admissible dt={suggested:.3e}")]
    CflViolation { requested: f64, suggested: f64 },

    #[error("instability detected at t={t:.4}: norm grew by factor {growth:.3e}")]
    Unstable { t: f64, growth: f64 },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("empty interval: {0}")]
    EmptyInterval(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
