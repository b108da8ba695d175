//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required column: {0}")]
    MissingColumn(String),

    #[error("malformed row at line {0}")]
    MalformedRow(u64),

    #[error("dataset is empty after loading")]
    EmptyDataset,

    #[error("train fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),

    #[error("unknown vulnerability id: {0}")]
    UnknownVulnerability(String),

    #[error("rule sid {sid} references vulnerability {vuln_id} absent from the inventory")]
    UnresolvedRule { sid: u32, vuln_id: String },

    #[error("path enumeration exceeded the cap of {0} paths")]
    LimitExceeded(usize),

    #[error("ANOVA F-test requires at least two distinct classes")]
    SingleClass,

    #[error("cannot train on an empty sample set")]
    EmptyTraining,

    #[error("input has {got} columns but the model expects {expected}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("prediction and truth vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("cannot sample from an empty pool")]
    EmptyPool,

    #[error("lifecycle run needs at least one batch")]
    EmptyBatches,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
