use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("trellis too large: {edges} edges exceeds cap of {cap}")]
    TooLarge { edges: usize, cap: usize },

    #[error("labeling is not right-resolving: state {state} has label {label} more than once")]
    NotRightResolving { state: usize, label: u32 },

    #[error("clustering infeasible: {0}")]
    Infeasible(String),

    #[error("mapping conditions not met: {0}")]
    ConditionsNotMet(String),

    #[error("design failed: {0}")]
    Design(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
