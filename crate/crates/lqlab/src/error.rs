use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("gradient check failed: max relative error {max_rel_err:.3e} exceeds {tolerance:.1e}")]
    GradientCheck { max_rel_err: f64, tolerance: f64 },

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
