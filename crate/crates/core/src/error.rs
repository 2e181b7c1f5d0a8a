use thiserror::Error;

pub type Result<T> = std::result::Result<T, NdcError>;

#[derive(Debug, Error)]
pub enum NdcError {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("empty vector or index set")]
    Empty,

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("group {0} of the feature partition is empty")]
    EmptyGroup(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fit failed after {attempts} attempts: every attempt produced an empty cluster")]
    AttemptsExhausted { attempts: usize },

    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),

    #[error("enumeration of {assignments} assignments exceeds the guard of {limit}; use fewer features")]
    EnumerationGuard { assignments: f64, limit: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("model format error: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NdcError {
    /// True for failures caused by the fitting procedure rather than bad input.
    pub fn is_algorithmic(&self) -> bool {
        matches!(
            self,
            NdcError::AttemptsExhausted { .. } | NdcError::AllRestartsFailed(_)
        )
    }
}
