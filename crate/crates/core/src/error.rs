use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} index {index} out of range (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("policy mixture needs at least one member")]
    EmptyPolicyList,
    #[error("{what} requires {required} entries, above the cap of {cap}")]
    Capacity {
        what: &'static str,
        required: u128,
        cap: u128,
    },
    #[error("learner `{learner}` needs exogenous observations, but the episode was run without them")]
    ObservationMode { learner: &'static str },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("record length mismatch: expected {expected} episodes, got {found}")]
    RecordMismatch { expected: usize, found: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
