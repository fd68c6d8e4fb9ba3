//! Rules-complete chess positions, legal move generation and the FEN, UCI and
//! SAN text codecs.
//!
//! All values are immutable: [`Board::apply_move`] returns a new board.
//! Legal moves are always returned sorted by `(from, to, promotion)`, which
//! keeps the engine's move index mapping reproducible.

mod board;
mod error;
mod fen;
mod movegen;
mod moves;
mod notation;
mod status;
mod types;

pub use board::{Board, Placement};
pub use error::ChessError;
pub use movegen::{legal_moves, legal_moves_from, perft, perft_divide};
pub use moves::{Move, MoveFlags};
pub use notation::{parse_move_text, to_san};
pub use status::{game_status, insufficient_material, GameStatus};
pub use types::{CastlingRights, Color, Piece, PieceKind, Square};

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// Number of slots in the move index space: `(from * 64 + to) * 5 + promotion`.
pub const MOVE_INDEX_SPACE: usize = 64 * 64 * 5;

/// Index of `mv` in the fixed move space used by the engine policy head.
pub fn move_index(mv: &Move) -> usize {
    (mv.from.index() * 64 + mv.to.index()) * 5 + PieceKind::promotion_slot(mv.promotion)
}

/// Inverse of [`move_index`]; flags are left at their defaults.
pub fn move_from_index(index: usize) -> Option<Move> {
    if index >= MOVE_INDEX_SPACE {
        return None;
    }
    let slot = index % 5;
    let pair = index / 5;
    let from = Square::from_index(pair / 64)?;
    let to = Square::from_index(pair % 64)?;
    Some(Move::new(from, to, PieceKind::from_promotion_slot(slot)))
}
