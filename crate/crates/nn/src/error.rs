use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("{op}: shape mismatch, expected {expected}, got {actual}")]
    Shape { op: &'static str, expected: String, actual: String },

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("target index {index} out of range for {classes} classes")]
    TargetOutOfRange { index: usize, classes: usize },

    #[error("duplicate parameter name '{0}'")]
    DuplicateParameter(String),

    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),

    #[error("invalid optimizer config: {0}")]
    Config(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
