use crate::error::ChessError;
use crate::movegen;
use crate::moves::Move;
use crate::types::{CastlingRights, Color, Piece, PieceKind, Square};

pub type Placement = [Option<Piece>; 64];

/// An immutable chess position.
///
/// Besides the six FEN fields the board carries repetition bookkeeping:
/// the number of times the current position (placement, castling rights and
/// side to move) has occurred, the same count for the position the opponent
/// moved from, and the keys of earlier positions since the last irreversible
/// move so that `apply_move` can keep the counters current.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Board {
    pub(crate) squares: Placement,
    pub(crate) side_to_move: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) en_passant: Option<Square>,
    pub(crate) halfmove_clock: u32,
    pub(crate) fullmove_number: u32,
    pub(crate) repetition_count: u32,
    pub(crate) previous_repetition_count: u32,
    pub(crate) history: Vec<u64>,
}

impl Default for Board {
    fn default() -> Self {
        Board::start()
    }
}

impl Board {
    pub fn start() -> Board {
        Board::from_fen(crate::START_FEN).expect("start FEN is valid")
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.squares[sq.index()]
    }

    pub fn placement(&self) -> &Placement {
        &self.squares
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling_rights(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant_target(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn repetition_count(&self) -> u32 {
        self.repetition_count
    }

    /// Repetition count of the position the last move was played from
    /// (1 when unknown, e.g. right after parsing a FEN).
    pub fn previous_repetition_count(&self) -> u32 {
        self.previous_repetition_count
    }

    pub fn piece_count(&self) -> usize {
        self.squares.iter().flatten().count()
    }

    pub fn king_square(&self, color: Color) -> Square {
        movegen::king_square(&self.squares, color).expect("board invariant: one king per color")
    }

    pub fn in_check(&self) -> bool {
        self.king_attacked(self.side_to_move)
    }

    /// Whether the king of `color` is attacked by the other side.
    pub fn king_attacked(&self, color: Color) -> bool {
        movegen::is_attacked(&self.squares, self.king_square(color), color.opposite())
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        movegen::legal_moves(self)
    }

    /// Returns the position after `mv`. The move must be legal; flags on the
    /// argument are ignored and recomputed.
    pub fn apply_move(&self, mv: &Move) -> Result<Board, ChessError> {
        let legal = crate::movegen::legal_moves_from(self, mv.from)
            .into_iter()
            .find(|m| m == mv)
            .ok_or_else(|| ChessError::IllegalMove { mv: mv.to_uci(), fen: self.to_fen() })?;
        Ok(self.make_unchecked(&legal))
    }

    /// Hash of placement, castling rights and side to move; the identity used
    /// for repetition counting.
    pub fn position_key(&self) -> u64 {
        zobrist_key(&self.squares, self.castling, self.side_to_move)
    }

    /// Applies a pseudo-legal move without legality validation.
    pub(crate) fn make_unchecked(&self, mv: &Move) -> Board {
        let mover = self.side_to_move;
        let mut squares = self.squares;
        let piece = squares[mv.from.index()].expect("move origin is occupied");
        let mut capture = squares[mv.to.index()].is_some();

        if piece.kind == PieceKind::Pawn && Some(mv.to) == self.en_passant && mv.from.file() != mv.to.file() {
            let victim = Square::new(mv.to.file(), mv.from.rank()).expect("on board");
            squares[victim.index()] = None;
            capture = true;
        }
        if piece.kind == PieceKind::King && mv.from.file().abs_diff(mv.to.file()) == 2 {
            let rank = mv.from.rank();
            let (rook_from, rook_to) = if mv.to.file() == 6 { (7, 5) } else { (0, 3) };
            let rf = Square::new(rook_from, rank).expect("on board");
            let rt = Square::new(rook_to, rank).expect("on board");
            squares[rt.index()] = squares[rf.index()].take();
        }
        squares[mv.from.index()] = None;
        squares[mv.to.index()] = Some(match mv.promotion {
            Some(kind) => Piece::new(kind, mover),
            None => piece,
        });

        let mut castling = self.castling;
        if piece.kind == PieceKind::King {
            castling.clear(mover);
        }
        for sq in [mv.from, mv.to] {
            match sq.index() {
                0 => castling.white_queen = false,
                7 => castling.white_king = false,
                56 => castling.black_queen = false,
                63 => castling.black_king = false,
                _ => {}
            }
        }

        let en_passant = if piece.kind == PieceKind::Pawn && mv.from.rank().abs_diff(mv.to.rank()) == 2 {
            Square::new(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2)
        } else {
            None
        };

        let irreversible = capture || piece.kind == PieceKind::Pawn;
        let halfmove_clock = if irreversible { 0 } else { self.halfmove_clock + 1 };
        let fullmove_number = self.fullmove_number + u32::from(mover == Color::Black);
        let side_to_move = mover.opposite();

        let history = if irreversible {
            Vec::new()
        } else {
            let mut h = self.history.clone();
            h.push(self.position_key());
            h
        };
        let key = zobrist_key(&squares, castling, side_to_move);
        let repetition_count = 1 + history.iter().filter(|&&k| k == key).count() as u32;

        Board {
            squares,
            side_to_move,
            castling,
            en_passant,
            halfmove_clock,
            fullmove_number,
            repetition_count,
            previous_repetition_count: self.repetition_count,
            history,
        }
    }

    /// Colors swapped and ranks mirrored, side to move flipped. Clocks are
    /// kept; repetition history is reset.
    pub fn mirror(&self) -> Board {
        let mut squares: Placement = [None; 64];
        for sq in Square::all() {
            if let Some(p) = self.squares[sq.index()] {
                squares[sq.flip_rank().index()] = Some(Piece::new(p.kind, p.color.opposite()));
            }
        }
        let c = self.castling;
        Board {
            squares,
            side_to_move: self.side_to_move.opposite(),
            castling: CastlingRights {
                white_king: c.black_king,
                white_queen: c.black_queen,
                black_king: c.white_king,
                black_queen: c.white_queen,
            },
            en_passant: self.en_passant.map(Square::flip_rank),
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
            repetition_count: self.repetition_count,
            previous_repetition_count: self.previous_repetition_count,
            history: Vec::new(),
        }
    }

    /// Same position with a different halfmove clock.
    pub fn with_halfmove_clock(&self, clock: u32) -> Board {
        Board { halfmove_clock: clock, ..self.clone() }
    }

    /// Same position with explicit repetition counters (both at least 1).
    /// Used when a board is restored from FEN plus stored counters; the
    /// earlier-position history is not recoverable and stays empty.
    pub fn with_repetition_counts(&self, current: u32, previous: u32) -> Board {
        Board {
            repetition_count: current.max(1),
            previous_repetition_count: previous.max(1),
            history: Vec::new(),
            ..self.clone()
        }
    }
}

const fn splitmix(state: u64) -> (u64, u64) {
    let s = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = s;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (s, z ^ (z >> 31))
}

struct Zobrist {
    pieces: [[u64; 64]; 12],
    castling: [u64; 16],
    black_to_move: u64,
}

const fn build_zobrist() -> Zobrist {
    let mut z = Zobrist { pieces: [[0; 64]; 12], castling: [0; 16], black_to_move: 0 };
    let mut state = 0x5CC0_2019_u64;
    let mut p = 0;
    while p < 12 {
        let mut s = 0;
        while s < 64 {
            let (next, v) = splitmix(state);
            state = next;
            z.pieces[p][s] = v;
            s += 1;
        }
        p += 1;
    }
    let mut c = 0;
    while c < 16 {
        let (next, v) = splitmix(state);
        state = next;
        z.castling[c] = v;
        c += 1;
    }
    let (_, v) = splitmix(state);
    z.black_to_move = v;
    z
}

static ZOBRIST: Zobrist = build_zobrist();

fn zobrist_key(squares: &Placement, castling: CastlingRights, side: Color) -> u64 {
    let mut key = ZOBRIST.castling[castling.bits() as usize];
    for (i, p) in squares.iter().enumerate() {
        if let Some(p) = p {
            key ^= ZOBRIST.pieces[p.index()][i];
        }
    }
    if side == Color::Black {
        key ^= ZOBRIST.black_to_move;
    }
    key
}
