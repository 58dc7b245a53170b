//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the engine, attacks, metrics, and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("stale forward trace: model version {model}, trace recorded at version {trace}")]
    StaleTrace { model: u64, trace: u64 },

    #[error("loss '{0}' is gradient-only and has no scalar value")]
    GradientOnlyLoss(String),

    #[error("operation requires grid-shaped (image) data: {0}")]
    GridRequired(&'static str),

    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
