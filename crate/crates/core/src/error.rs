use scc_chess::ChessError;
use scc_nn::NnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Chess(#[from] ChessError),

    #[error(transparent)]
    Nn(#[from] NnError),

    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("position is terminal ({0}); there is no move to predict")]
    Terminal(String),

    #[error("no continuation: {0}")]
    NoContinuation(String),

    #[error("move {mv} is not legal in {fen}")]
    MoveNotLegal { mv: String, fen: String },

    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("token id {id} outside vocabulary of {size}")]
    TokenOutOfRange { id: usize, size: usize },

    #[error("category {0} is not available in this bundle")]
    MissingCategory(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl CoreError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> CoreError {
        CoreError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// True for errors caused by diverging numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, CoreError::NonFiniteLoss { .. } | CoreError::Nn(NnError::NonFinite(_)))
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
