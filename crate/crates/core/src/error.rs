use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown relation label: {0}")]
    UnknownRelation(String),

    #[error("record {record_id} has dangling parent reference {parent_id}")]
    DanglingParent { record_id: String, parent_id: String },

    #[error("record {record_id} at {timestamp} falls outside all periods")]
    OutsidePeriods { record_id: String, timestamp: String },

    #[error("cluster count {k} out of range 1..={n}")]
    ClusterCountOutOfRange { k: usize, n: usize },

    #[error("network has {n} actors, need at least {min}")]
    TooFewActors { n: usize, min: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),
}
