//! FEN codec.

use crate::board::{Board, Placement};
use crate::error::ChessError;
use crate::movegen;
use crate::types::{CastlingRights, Color, Piece, PieceKind, Square};

impl Board {
    /// Parses a six-field FEN record. The repetition counters start at 1.
    pub fn from_fen(text: &str) -> Result<Board, ChessError> {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(ChessError::fen("field count", format!("expected 6 fields, found {}", fields.len())));
        }

        let squares = parse_placement(fields[0])?;

        let side_to_move = match fields[1] {
            "w" => Color::White,
            "b" => Color::Black,
            other => return Err(ChessError::fen("side to move", format!("'{other}'"))),
        };

        let mut castling = CastlingRights::default();
        if fields[2] != "-" {
            for c in fields[2].chars() {
                let flag = match c {
                    'K' => &mut castling.white_king,
                    'Q' => &mut castling.white_queen,
                    'k' => &mut castling.black_king,
                    'q' => &mut castling.black_queen,
                    _ => return Err(ChessError::fen("castling", format!("unexpected '{c}'"))),
                };
                if *flag {
                    return Err(ChessError::fen("castling", format!("duplicate '{c}'")));
                }
                *flag = true;
            }
        }

        let en_passant = match fields[3] {
            "-" => None,
            s => {
                let sq: Square = s.parse().map_err(|_| ChessError::fen("en passant", format!("'{s}'")))?;
                let expected_rank = if side_to_move == Color::White { 5 } else { 2 };
                if sq.rank() != expected_rank {
                    return Err(ChessError::fen("en passant", format!("{s} is not on the capture rank")));
                }
                Some(sq)
            }
        };

        let halfmove_clock: u32 =
            fields[4].parse().map_err(|_| ChessError::fen("halfmove clock", format!("'{}'", fields[4])))?;
        let fullmove_number: u32 =
            fields[5].parse().map_err(|_| ChessError::fen("fullmove number", format!("'{}'", fields[5])))?;
        if fullmove_number == 0 {
            return Err(ChessError::fen("fullmove number", "must be at least 1"));
        }

        let opponent = side_to_move.opposite();
        let their_king = movegen::king_square(&squares, opponent).expect("validated above");
        if movegen::is_attacked(&squares, their_king, side_to_move) {
            return Err(ChessError::fen("placement", "side not to move is in check"));
        }

        Ok(Board {
            squares,
            side_to_move,
            castling: sanitize_castling(&squares, castling),
            en_passant,
            halfmove_clock,
            fullmove_number,
            repetition_count: 1,
            previous_repetition_count: 1,
            history: Vec::new(),
        })
    }

    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(90);
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                let sq = Square::new(file, rank).expect("on board");
                match self.squares[sq.index()] {
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from(b'0' + empty));
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                out.push(char::from(b'0' + empty));
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(if self.side_to_move == Color::White { 'w' } else { 'b' });
        out.push(' ');
        let c = self.castling;
        let mut rights = String::new();
        for (flag, ch) in [(c.white_king, 'K'), (c.white_queen, 'Q'), (c.black_king, 'k'), (c.black_queen, 'q')] {
            if flag {
                rights.push(ch);
            }
        }
        out.push_str(if rights.is_empty() { "-" } else { &rights });
        out.push(' ');
        match self.en_passant {
            Some(sq) => out.push_str(&sq.to_string()),
            None => out.push('-'),
        }
        out.push_str(&format!(" {} {}", self.halfmove_clock, self.fullmove_number));
        out
    }
}

fn parse_placement(text: &str) -> Result<Placement, ChessError> {
    let rows: Vec<&str> = text.split('/').collect();
    if rows.len() != 8 {
        return Err(ChessError::fen("placement", format!("expected 8 ranks, found {}", rows.len())));
    }
    let mut squares: Placement = [None; 64];
    for (i, row) in rows.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(ChessError::fen("placement", format!("bad empty-run digit '{c}'")));
                }
                file += d as u8;
            } else {
                let piece = Piece::from_fen_char(c)
                    .ok_or_else(|| ChessError::fen("placement", format!("illegal piece letter '{c}'")))?;
                if file >= 8 {
                    return Err(ChessError::fen("placement", format!("rank {} overflows", rank + 1)));
                }
                if piece.kind == PieceKind::Pawn && (rank == 0 || rank == 7) {
                    return Err(ChessError::fen("placement", "pawn on first or last rank"));
                }
                squares[(rank * 8 + file) as usize] = Some(piece);
                file += 1;
            }
            if file > 8 {
                return Err(ChessError::fen("placement", format!("rank {} overflows", rank + 1)));
            }
        }
        if file != 8 {
            return Err(ChessError::fen("placement", format!("rank {} has {file} files", rank + 1)));
        }
    }
    for color in [Color::White, Color::Black] {
        let kings = squares.iter().flatten().filter(|p| p.kind == PieceKind::King && p.color == color).count();
        if kings != 1 {
            return Err(ChessError::fen("placement", format!("{color:?} has {kings} kings")));
        }
    }
    Ok(squares)
}

/// Drops castling rights whose king or rook is not on its home square.
fn sanitize_castling(squares: &Placement, mut rights: CastlingRights) -> CastlingRights {
    let has = |idx: usize, kind: PieceKind, color: Color| squares[idx] == Some(Piece::new(kind, color));
    if !has(4, PieceKind::King, Color::White) {
        rights.clear(Color::White);
    }
    if !has(60, PieceKind::King, Color::Black) {
        rights.clear(Color::Black);
    }
    rights.white_king &= has(7, PieceKind::Rook, Color::White);
    rights.white_queen &= has(0, PieceKind::Rook, Color::White);
    rights.black_king &= has(63, PieceKind::Rook, Color::Black);
    rights.black_queen &= has(56, PieceKind::Rook, Color::Black);
    rights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::START_FEN;

    #[test]
    fn start_position_fields() {
        let b = Board::from_fen(START_FEN).unwrap();
        assert_eq!(b.piece_count(), 32);
        assert_eq!(b.side_to_move(), Color::White);
        assert_eq!(b.castling_rights(), CastlingRights::ALL);
        assert_eq!(b.repetition_count(), 1);
        assert_eq!(b.to_fen(), START_FEN);
    }

    #[test]
    fn rejects_kingless_board() {
        let err = Board::from_fen("8/8/8/8/8/8/8/8 w - - 0 1").unwrap_err();
        assert!(matches!(err, ChessError::Fen { field: "placement", .. }), "{err}");
    }

    #[test]
    fn rejects_bad_field_count_and_letters() {
        assert!(matches!(
            Board::from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -"),
            Err(ChessError::Fen { field: "field count", .. })
        ));
        assert!(matches!(
            Board::from_fen("rnbqkbnr/ppppxppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"),
            Err(ChessError::Fen { field: "placement", .. })
        ));
        assert!(matches!(
            Board::from_fen("4k3/8/8/8/8/8/8/3KK3 w - - 0 1"),
            Err(ChessError::Fen { field: "placement", .. })
        ));
        assert!(matches!(
            Board::from_fen("4k3/8/8/8/8/8/8/4K3 w - e3 0 1"),
            Err(ChessError::Fen { field: "en passant", .. })
        ));
        assert!(matches!(
            Board::from_fen("4k2P/8/8/8/8/8/8/4K3 w - - 0 1"),
            Err(ChessError::Fen { field: "placement", .. })
        ));
    }

    #[test]
    fn sanitizes_castling_without_rook() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/4K3 w KQkq - 0 1").unwrap();
        assert_eq!(b.castling_rights(), CastlingRights::default());
    }
}
