use crate::board::Board;
use crate::types::{Color, PieceKind, Square};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameStatus {
    Ongoing,
    Checkmate,
    Stalemate,
    DrawFiftyMove,
    DrawRepetition,
    DrawInsufficientMaterial,
}

impl GameStatus {
    pub fn is_terminal(self) -> bool {
        self != GameStatus::Ongoing
    }

    pub fn is_draw(self) -> bool {
        matches!(
            self,
            GameStatus::Stalemate
                | GameStatus::DrawFiftyMove
                | GameStatus::DrawRepetition
                | GameStatus::DrawInsufficientMaterial
        )
    }
}

/// Classifies a position. Mate and stalemate take precedence over the
/// clock, repetition and material draws.
pub fn game_status(board: &Board) -> GameStatus {
    let no_moves = board.legal_moves().is_empty();
    if no_moves {
        return if board.in_check() { GameStatus::Checkmate } else { GameStatus::Stalemate };
    }
    if board.halfmove_clock() >= 100 {
        return GameStatus::DrawFiftyMove;
    }
    if board.repetition_count() >= 3 {
        return GameStatus::DrawRepetition;
    }
    if insufficient_material(board) {
        return GameStatus::DrawInsufficientMaterial;
    }
    GameStatus::Ongoing
}

/// K vs K, K+minor vs K, and K+B vs K+B with bishops on the same color.
pub fn insufficient_material(board: &Board) -> bool {
    let mut minors: Vec<(Color, PieceKind, Square)> = Vec::new();
    for sq in Square::all() {
        let Some(p) = board.piece_at(sq) else { continue };
        match p.kind {
            PieceKind::King => {}
            PieceKind::Knight | PieceKind::Bishop => minors.push((p.color, p.kind, sq)),
            _ => return false,
        }
    }
    match minors.as_slice() {
        [] | [_] => true,
        [(c1, PieceKind::Bishop, s1), (c2, PieceKind::Bishop, s2)] => c1 != c2 && s1.is_light() == s2.is_light(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn material_draws() {
        let cases = [
            ("4k3/8/8/8/8/8/8/4K3 w - - 0 1", true),
            ("4k3/8/8/8/8/8/8/4KN2 w - - 0 1", true),
            ("4kb2/8/8/8/8/8/8/2B1K3 w - - 0 1", true),
            ("4k1b1/8/8/8/8/8/8/2B1K3 w - - 0 1", false),
            ("4k3/8/8/8/8/8/8/3NKN2 w - - 0 1", false),
            ("4k3/8/8/8/8/8/4P3/4K3 w - - 0 1", false),
        ];
        for (fen, expected) in cases {
            assert_eq!(insufficient_material(&Board::from_fen(fen).unwrap()), expected, "{fen}");
        }
    }

    #[test]
    fn fifty_move_threshold() {
        let b = Board::start().with_halfmove_clock(100);
        assert_eq!(game_status(&b), GameStatus::DrawFiftyMove);
        assert_eq!(game_status(&b.with_halfmove_clock(99)), GameStatus::Ongoing);
    }

    #[test]
    fn stalemate_position() {
        let b = Board::from_fen("k7/2K5/1Q6/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(b.legal_moves().is_empty());
        assert_eq!(game_status(&b), GameStatus::Stalemate);
    }
}
