use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown function name `{0}`")]
    UnknownFunction(String),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("evaluation budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("population too small: need at least {need}, have {have}")]
    PopulationTooSmall { need: usize, have: usize },

    #[error("action {0} out of range [0, 15)")]
    ActionOutOfRange(usize),

    #[error("tape was recorded against a different parameter version")]
    StaleTape,

    #[error("empty batch")]
    EmptyBatch,

    #[error("batch of size {0} is too small for the order-aware loss")]
    BatchTooSmall(usize),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },

    #[error("replay buffer holds {have} transitions, need {need}")]
    InsufficientBuffer { have: usize, need: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("malformed dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
