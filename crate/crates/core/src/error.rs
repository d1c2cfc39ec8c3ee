use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DriftMemError>;

#[derive(Debug, Error)]
pub enum DriftMemError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("memory is empty")]
    EmptyMemory,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("generator starved: needed a {needed} instance after {draws} raw draws")]
    GeneratorStarvation { needed: &'static str, draws: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
