use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ChessError {
    #[error("invalid FEN ({field}): {reason}")]
    Fen { field: &'static str, reason: String },

    #[error("illegal move {mv} in position {fen}")]
    IllegalMove { mv: String, fen: String },

    #[error("ambiguous move '{text}': {candidates} candidates")]
    AmbiguousMove { text: String, candidates: usize },

    #[error("unparseable move text: {0}")]
    Unparseable(String),
}

impl ChessError {
    pub(crate) fn fen(field: &'static str, reason: impl Into<String>) -> Self {
        ChessError::Fen { field, reason: reason.into() }
    }
}
