//! Legal move generation on a mailbox board.

use crate::board::{Board, Placement};
use crate::moves::Move;
use crate::types::{Color, Piece, PieceKind, Square};

const KNIGHT_STEPS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_STEPS: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub(crate) fn king_square(squares: &Placement, color: Color) -> Option<Square> {
    squares.iter().position(|p| *p == Some(Piece::new(PieceKind::King, color))).and_then(Square::from_index)
}

/// Whether `sq` is attacked by any piece of color `by`.
pub(crate) fn is_attacked(squares: &Placement, sq: Square, by: Color) -> bool {
    let at = |s: Option<Square>| s.and_then(|s| squares[s.index()]);
    let is = |s: Option<Square>, kind: PieceKind| at(s) == Some(Piece::new(kind, by));

    // a pawn of color `by` attacks diagonally forward from its point of view
    let pawn_dr = if by == Color::White { -1 } else { 1 };
    if is(sq.offset(-1, pawn_dr), PieceKind::Pawn) || is(sq.offset(1, pawn_dr), PieceKind::Pawn) {
        return true;
    }
    if KNIGHT_STEPS.iter().any(|&(df, dr)| is(sq.offset(df, dr), PieceKind::Knight)) {
        return true;
    }
    if KING_STEPS.iter().any(|&(df, dr)| is(sq.offset(df, dr), PieceKind::King)) {
        return true;
    }
    let slider_hit = |dirs: &[(i8, i8)], kinds: [PieceKind; 2]| {
        dirs.iter().any(|&(df, dr)| {
            let mut cur = sq.offset(df, dr);
            while let Some(s) = cur {
                if let Some(p) = squares[s.index()] {
                    return p.color == by && kinds.contains(&p.kind);
                }
                cur = s.offset(df, dr);
            }
            false
        })
    };
    slider_hit(&ROOK_DIRS, [PieceKind::Rook, PieceKind::Queen])
        || slider_hit(&BISHOP_DIRS, [PieceKind::Bishop, PieceKind::Queen])
}

fn push_pawn_move(out: &mut Vec<Move>, from: Square, to: Square, capture: bool) {
    if to.rank() == 0 || to.rank() == 7 {
        for kind in PieceKind::PROMOTIONS {
            let mut m = Move::new(from, to, Some(kind));
            m.flags.capture = capture;
            out.push(m);
        }
    } else {
        let mut m = Move::new(from, to, None);
        m.flags.capture = capture;
        out.push(m);
    }
}

fn pseudo_legal(board: &Board) -> Vec<Move> {
    let mut out = Vec::with_capacity(48);
    for from in Square::all() {
        piece_moves(board, from, &mut out);
    }
    castling_moves(board, &mut out);
    out
}

/// Pseudo-legal non-castling moves of the mover's piece on `from`.
fn piece_moves(board: &Board, from: Square, out: &mut Vec<Move>) {
    let us = board.side_to_move;
    let squares = &board.squares;
    let Some(piece) = squares[from.index()] else {
        return;
    };
    if piece.color != us {
        return;
    }
    {
        match piece.kind {
            PieceKind::Pawn => {
                let dir: i8 = if us == Color::White { 1 } else { -1 };
                let start_rank = if us == Color::White { 1 } else { 6 };
                if let Some(one) = from.offset(0, dir) {
                    if squares[one.index()].is_none() {
                        push_pawn_move(out, from, one, false);
                        if from.rank() == start_rank {
                            if let Some(two) = from.offset(0, 2 * dir) {
                                if squares[two.index()].is_none() {
                                    out.push(Move::new(from, two, None));
                                }
                            }
                        }
                    }
                }
                for df in [-1, 1] {
                    let Some(to) = from.offset(df, dir) else {
                        continue;
                    };
                    match squares[to.index()] {
                        Some(target) if target.color != us => push_pawn_move(out, from, to, true),
                        None if Some(to) == board.en_passant => {
                            let mut m = Move::new(from, to, None);
                            m.flags.capture = true;
                            m.flags.en_passant = true;
                            out.push(m);
                        }
                        _ => {}
                    }
                }
            }
            PieceKind::Knight | PieceKind::King => {
                let steps = if piece.kind == PieceKind::Knight { &KNIGHT_STEPS } else { &KING_STEPS };
                for &(df, dr) in steps {
                    let Some(to) = from.offset(df, dr) else {
                        continue;
                    };
                    match squares[to.index()] {
                        Some(t) if t.color == us => {}
                        target => {
                            let mut m = Move::new(from, to, None);
                            m.flags.capture = target.is_some();
                            out.push(m);
                        }
                    }
                }
            }
            PieceKind::Rook | PieceKind::Bishop | PieceKind::Queen => {
                let dirs: &[(i8, i8)] = match piece.kind {
                    PieceKind::Rook => &ROOK_DIRS,
                    PieceKind::Bishop => &BISHOP_DIRS,
                    _ => &KING_STEPS,
                };
                for &(df, dr) in dirs {
                    let mut cur = from.offset(df, dr);
                    while let Some(to) = cur {
                        match squares[to.index()] {
                            None => out.push(Move::new(from, to, None)),
                            Some(t) => {
                                if t.color != us {
                                    let mut m = Move::new(from, to, None);
                                    m.flags.capture = true;
                                    out.push(m);
                                }
                                break;
                            }
                        }
                        cur = to.offset(df, dr);
                    }
                }
            }
        }
    }
}

fn castling_moves(board: &Board, out: &mut Vec<Move>) {
    let us = board.side_to_move;
    let them = us.opposite();
    let rank = if us == Color::White { 0 } else { 7 };
    let sq = |file: u8| Square::new(file, rank).expect("on board");
    let squares = &board.squares;
    let king = Piece::new(PieceKind::King, us);
    let rook = Piece::new(PieceKind::Rook, us);
    if squares[sq(4).index()] != Some(king) || is_attacked(squares, sq(4), them) {
        return;
    }
    let rights = board.castling;
    if rights.king_side(us)
        && squares[sq(7).index()] == Some(rook)
        && [5, 6].iter().all(|&f| squares[sq(f).index()].is_none())
        && [5, 6].iter().all(|&f| !is_attacked(squares, sq(f), them))
    {
        let mut m = Move::new(sq(4), sq(6), None);
        m.flags.castle_king = true;
        out.push(m);
    }
    if rights.queen_side(us)
        && squares[sq(0).index()] == Some(rook)
        && [1, 2, 3].iter().all(|&f| squares[sq(f).index()].is_none())
        && [2, 3].iter().all(|&f| !is_attacked(squares, sq(f), them))
    {
        let mut m = Move::new(sq(4), sq(2), None);
        m.flags.castle_queen = true;
        out.push(m);
    }
}

/// Placement after `mv`, ignoring clocks and rights. Used for legality tests.
fn placement_after(board: &Board, mv: &Move) -> Placement {
    let mut squares = board.squares;
    let piece = squares[mv.from.index()].expect("origin occupied");
    if mv.flags.en_passant {
        let victim = Square::new(mv.to.file(), mv.from.rank()).expect("on board");
        squares[victim.index()] = None;
    }
    if mv.is_castle() {
        let rank = mv.from.rank();
        let (rf, rt) = if mv.flags.castle_king { (7, 5) } else { (0, 3) };
        let rf = Square::new(rf, rank).expect("on board").index();
        let rt = Square::new(rt, rank).expect("on board").index();
        squares[rt] = squares[rf].take();
    }
    squares[mv.from.index()] = None;
    squares[mv.to.index()] = Some(match mv.promotion {
        Some(kind) => Piece::new(kind, piece.color),
        None => piece,
    });
    squares
}

/// Keeps the moves that do not leave the mover in check, with check flags set.
fn keep_legal(board: &Board, pseudo: Vec<Move>) -> Vec<Move> {
    let us = board.side_to_move;
    let them = us.opposite();
    let (Some(king), Some(their_king)) = (king_square(&board.squares, us), king_square(&board.squares, them)) else {
        return Vec::new();
    };
    let mut moves: Vec<Move> = pseudo
        .into_iter()
        .filter_map(|mut m| {
            let after = placement_after(board, &m);
            let our_king = if m.from == king { m.to } else { king };
            if is_attacked(&after, our_king, them) {
                return None;
            }
            m.flags.gives_check = is_attacked(&after, their_king, us);
            Some(m)
        })
        .collect();
    moves.sort();
    moves
}

/// All legal moves, sorted by (from, to, promotion slot), with flags set.
pub fn legal_moves(board: &Board) -> Vec<Move> {
    keep_legal(board, pseudo_legal(board))
}

/// The legal moves of the piece on `from`, in the same order and with the
/// same flags as in `legal_moves`.
pub fn legal_moves_from(board: &Board, from: Square) -> Vec<Move> {
    let mut out = Vec::new();
    piece_moves(board, from, &mut out);
    if board.squares[from.index()] == Some(Piece::new(PieceKind::King, board.side_to_move)) {
        castling_moves(board, &mut out);
    }
    keep_legal(board, out)
}

/// Number of leaf nodes of the legal move tree at exactly `depth` plies.
pub fn perft(board: &Board, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = legal_moves(board);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|m| perft(&board.make_unchecked(m), depth - 1)).sum()
}

/// Per-root-move leaf counts, useful when hunting generator bugs.
pub fn perft_divide(board: &Board, depth: u32) -> Vec<(Move, u64)> {
    if depth == 0 {
        return Vec::new();
    }
    legal_moves(board).into_iter().map(|m| (m, perft(&board.make_unchecked(&m), depth - 1))).collect()
}
