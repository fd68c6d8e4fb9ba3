use scc_chess::{Board, Move, Piece, PieceKind, Square};

use crate::error::{CoreError, Result};

/// Size of the shared token space of move features.
pub const FEATURE_VOCAB: usize = 64 + 13 + 5 + 2;
pub const FEATURE_LEN: usize = 6;

const PIECE_BASE: usize = 64;
const PROMOTION_BASE: usize = PIECE_BASE + 13;
const CHECK_BASE: usize = PROMOTION_BASE + 5;

/// The six descriptive tokens of a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveFeatures {
    pub from: Square,
    pub to: Square,
    pub moved: Piece,
    /// Whatever stands on the destination square before the move.
    pub target: Option<Piece>,
    pub promotion: Option<PieceKind>,
    pub gives_check: bool,
}

impl MoveFeatures {
    /// Token ids in `0..FEATURE_VOCAB`, in feature order.
    pub fn tokens(&self) -> [usize; FEATURE_LEN] {
        [
            self.from.index(),
            self.to.index(),
            PIECE_BASE + 1 + self.moved.index(),
            PIECE_BASE + self.target.map_or(0, |p| 1 + p.index()),
            PROMOTION_BASE + PieceKind::promotion_slot(self.promotion),
            CHECK_BASE + usize::from(self.gives_check),
        ]
    }
}

/// Reads the features of `mv` off `board`; the check state is taken from the
/// position after the move.
pub fn move_features(board: &Board, mv: &Move) -> Result<MoveFeatures> {
    let legal = board.legal_moves();
    let mv = legal
        .iter()
        .find(|m| *m == mv)
        .ok_or_else(|| CoreError::MoveNotLegal { mv: mv.to_uci(), fen: board.to_fen() })?;
    let after = board.apply_move(mv)?;
    Ok(MoveFeatures {
        from: mv.from,
        to: mv.to,
        moved: board.piece_at(mv.from).expect("legal move starts on a piece"),
        target: board.piece_at(mv.to),
        promotion: mv.promotion,
        gives_check: after.in_check(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use scc_chess::{game_status, parse_move_text, Color, GameStatus};

    #[test]
    fn pawn_push_from_start() {
        let b = Board::start();
        let f = move_features(&b, &parse_move_text(&b, "e2e4").unwrap()).unwrap();
        assert_eq!(f.from.to_string(), "e2");
        assert_eq!(f.to.to_string(), "e4");
        assert_eq!(f.moved, Piece::new(PieceKind::Pawn, Color::White));
        assert_eq!(f.target, None);
        assert_eq!(f.promotion, None);
        assert!(!f.gives_check);
        let t = f.tokens();
        assert!(t.iter().all(|&x| x < FEATURE_VOCAB));
        assert_eq!(t[3], PIECE_BASE);
    }

    #[test]
    fn capture_promotion() {
        let b = Board::from_fen("r3k3/1P6/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        let f = move_features(&b, &parse_move_text(&b, "b7a8q").unwrap()).unwrap();
        assert_eq!(f.target, Some(Piece::new(PieceKind::Rook, Color::Black)));
        assert_eq!(f.promotion, Some(PieceKind::Queen));
        assert!(f.gives_check);
    }

    #[test]
    fn scholars_mate_gives_check() {
        let mut b = Board::start();
        for m in ["e2e4", "e7e5", "f1c4", "b8c6", "d1h5", "g8f6"] {
            b = b.apply_move(&parse_move_text(&b, m).unwrap()).unwrap();
        }
        let mv = parse_move_text(&b, "Qxf7#").unwrap();
        let f = move_features(&b, &mv).unwrap();
        assert!(f.gives_check);
        assert_eq!(game_status(&b.apply_move(&mv).unwrap()), GameStatus::Checkmate);
    }

    #[test]
    fn tokens_are_distinct_per_field() {
        let b = Board::start();
        let all: Vec<[usize; 6]> = b.legal_moves().iter().map(|m| move_features(&b, m).unwrap().tokens()).collect();
        for (i, a) in all.iter().enumerate() {
            for c in &all[i + 1..] {
                assert_ne!(a, c);
            }
        }
    }

    #[test]
    fn illegal_move_is_rejected() {
        let b = Board::start();
        let mv = Move::new("e2".parse().unwrap(), "e5".parse().unwrap(), None);
        assert!(move_features(&b, &mv).is_err());
    }
}
