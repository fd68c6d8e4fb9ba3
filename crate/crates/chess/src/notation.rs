//! UCI and SAN move text.

use crate::board::Board;
use crate::error::ChessError;
use crate::moves::Move;
use crate::status::{game_status, GameStatus};
use crate::types::{PieceKind, Square};

/// Resolves UCI (`e2e4`, `b7b8q`) or SAN (`Nf3`, `O-O`, `exd5+`) text to the
/// unique legal move it denotes on `board`.
pub fn parse_move_text(board: &Board, text: &str) -> Result<Move, ChessError> {
    let text = text.trim();
    if let Some((from, to, promo)) = parse_uci_syntax(text) {
        let wanted = Move::new(from, to, promo);
        return board
            .legal_moves()
            .into_iter()
            .find(|m| *m == wanted)
            .ok_or_else(|| ChessError::IllegalMove { mv: text.to_string(), fen: board.to_fen() });
    }
    parse_san(board, text)
}

fn parse_uci_syntax(text: &str) -> Option<(Square, Square, Option<PieceKind>)> {
    if !text.is_ascii() || !(4..=5).contains(&text.len()) {
        return None;
    }
    let from: Square = text[0..2].parse().ok()?;
    let to: Square = text[2..4].parse().ok()?;
    let promo = match text.as_bytes().get(4) {
        None => None,
        Some(&c) => match PieceKind::from_letter(c as char)? {
            k @ (PieceKind::Queen | PieceKind::Rook | PieceKind::Bishop | PieceKind::Knight) => Some(k),
            _ => return None,
        },
    };
    Some((from, to, promo))
}

fn parse_san(board: &Board, original: &str) -> Result<Move, ChessError> {
    let unparseable = || ChessError::Unparseable(original.to_string());
    let text = original.trim_end_matches(['+', '#', '!', '?']);
    if text.is_empty() {
        return Err(unparseable());
    }
    let legal = board.legal_moves();
    let pick = |candidates: Vec<Move>| match candidates.len() {
        0 => Err(ChessError::IllegalMove { mv: original.to_string(), fen: board.to_fen() }),
        1 => Ok(candidates[0]),
        n => Err(ChessError::AmbiguousMove { text: original.to_string(), candidates: n }),
    };

    match text {
        "O-O" | "0-0" => return pick(legal.into_iter().filter(|m| m.flags.castle_king).collect()),
        "O-O-O" | "0-0-0" => return pick(legal.into_iter().filter(|m| m.flags.castle_queen).collect()),
        _ => {}
    }

    let mut chars: Vec<char> = text.chars().collect();
    let kind = match chars.first() {
        Some(c) if "NBRQK".contains(*c) => {
            let k = PieceKind::from_letter(*c).ok_or_else(unparseable)?;
            chars.remove(0);
            k
        }
        Some(_) => PieceKind::Pawn,
        None => return Err(unparseable()),
    };

    let mut promotion = None;
    if let Some(&last) = chars.last() {
        if "NBRQ".contains(last) {
            if kind != PieceKind::Pawn {
                return Err(unparseable());
            }
            promotion = PieceKind::from_letter(last);
            chars.pop();
            if chars.last() == Some(&'=') {
                chars.pop();
            }
        }
    }

    if chars.len() < 2 {
        return Err(unparseable());
    }
    let dest: String = chars[chars.len() - 2..].iter().collect();
    let to: Square = dest.parse().map_err(|_| unparseable())?;
    let mut from_file = None;
    let mut from_rank = None;
    for &c in &chars[..chars.len() - 2] {
        match c {
            'a'..='h' => from_file = Some(c as u8 - b'a'),
            '1'..='8' => from_rank = Some(c as u8 - b'1'),
            'x' | ':' | '-' => {}
            _ => return Err(unparseable()),
        }
    }

    let candidates = legal
        .into_iter()
        .filter(|m| {
            m.to == to
                && m.promotion == promotion
                && board.piece_at(m.from).map(|p| p.kind) == Some(kind)
                && !m.is_castle()
                && from_file.is_none_or(|f| m.from.file() == f)
                && from_rank.is_none_or(|r| m.from.rank() == r)
        })
        .collect();
    pick(candidates)
}

/// Standard algebraic notation for a legal move, with `+`/`#` suffixes.
pub fn to_san(board: &Board, mv: &Move) -> Result<String, ChessError> {
    let after = board.apply_move(mv)?;
    let legal = board.legal_moves();
    let mv = legal.iter().find(|m| *m == mv).expect("apply_move validated legality");
    let piece = board.piece_at(mv.from).expect("origin occupied");

    let mut out = String::new();
    if mv.flags.castle_king {
        out.push_str("O-O");
    } else if mv.flags.castle_queen {
        out.push_str("O-O-O");
    } else if piece.kind == PieceKind::Pawn {
        if mv.flags.capture {
            out.push((b'a' + mv.from.file()) as char);
            out.push('x');
        }
        out.push_str(&mv.to.to_string());
        if let Some(p) = mv.promotion {
            out.push('=');
            out.push(p.san_letter().expect("promotion piece has a letter"));
        }
    } else {
        out.push(piece.kind.san_letter().expect("non-pawn has a letter"));
        let rivals: Vec<&Move> = legal
            .iter()
            .filter(|m| m.to == mv.to && m.from != mv.from && board.piece_at(m.from) == Some(piece))
            .collect();
        if !rivals.is_empty() {
            let file_unique = rivals.iter().all(|m| m.from.file() != mv.from.file());
            let rank_unique = rivals.iter().all(|m| m.from.rank() != mv.from.rank());
            if file_unique {
                out.push((b'a' + mv.from.file()) as char);
            } else if rank_unique {
                out.push((b'1' + mv.from.rank()) as char);
            } else {
                out.push_str(&mv.from.to_string());
            }
        }
        if mv.flags.capture {
            out.push('x');
        }
        out.push_str(&mv.to.to_string());
    }

    if game_status(&after) == GameStatus::Checkmate {
        out.push('#');
    } else if mv.flags.gives_check {
        out.push('+');
    }
    Ok(out)
}
