//! Error types shared across the crate.

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    Shape {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite values produced by {op}")]
    NonFinite { op: &'static str },

    #[error("capacity exceeded: position {pos} beyond limit {limit}")]
    Capacity { pos: usize, limit: usize },

    #[error("timestamps must be non-decreasing: saw {prev} then {next}")]
    TimeOrder { prev: i64, next: i64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("no valid training targets in batch")]
    EmptyBatch,

    #[error("item id {id} out of range (vocab {vocab})")]
    ItemOutOfRange { id: u32, vocab: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
