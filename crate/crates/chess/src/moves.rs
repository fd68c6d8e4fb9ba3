use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::types::{PieceKind, Square};

/// Properties of a move that depend on the position it was generated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct MoveFlags {
    pub capture: bool,
    pub en_passant: bool,
    pub castle_king: bool,
    pub castle_queen: bool,
    pub gives_check: bool,
}

/// A move. Identity (equality, hashing, ordering) is `(from, to, promotion)`;
/// the flags are derived data attached by the move generator.
#[derive(Clone, Copy, Debug)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
    pub flags: MoveFlags,
}

impl Move {
    pub fn new(from: Square, to: Square, promotion: Option<PieceKind>) -> Self {
        Move { from, to, promotion, flags: MoveFlags::default() }
    }

    fn key(&self) -> (usize, usize, usize) {
        (self.from.index(), self.to.index(), PieceKind::promotion_slot(self.promotion))
    }

    pub fn is_castle(&self) -> bool {
        self.flags.castle_king || self.flags.castle_queen
    }

    /// Long algebraic coordinate notation, e.g. `e2e4` or `b7b8q`.
    pub fn to_uci(&self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let Some(p) = self.promotion {
            s.push(p.san_letter().unwrap_or('q').to_ascii_lowercase());
        }
        s
    }
}

impl PartialEq for Move {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Move {}

impl Hash for Move {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Move {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Move {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_uci())
    }
}
