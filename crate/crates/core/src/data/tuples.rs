use std::path::Path;

use scc_chess::{Board, Color, Move, PieceKind, Square};

use super::pgn::{initial_board, PgnGame};
use crate::engine::{Outcome, TrainingTuple};
use crate::error::{CoreError, Result};

/// Counters of what the rating and result filter dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractStats {
    pub accepted_games: usize,
    pub below_rating: usize,
    pub missing_rating: usize,
    pub unfinished: usize,
}

fn elo(game: &PgnGame, tag: &str) -> Option<u32> {
    game.tag(tag).and_then(|v| v.trim().parse().ok())
}

/// White's result of a finished game.
fn white_outcome(result: &str) -> Option<Outcome> {
    match result {
        "1-0" => Some(Outcome::Win),
        "0-1" => Some(Outcome::Loss),
        "1/2-1/2" => Some(Outcome::Draw),
        _ => None,
    }
}

/// One tuple per ply of every finished game whose players are both rated at
/// least `min_rating`. Labels are the final result seen by the mover.
pub fn extract_engine_tuples(games: &[PgnGame], min_rating: u32) -> (Vec<TrainingTuple>, ExtractStats) {
    let mut stats = ExtractStats::default();
    let mut tuples = Vec::new();
    for game in games {
        let (Some(white), Some(black)) = (elo(game, "WhiteElo"), elo(game, "BlackElo")) else {
            stats.missing_rating += 1;
            continue;
        };
        if white < min_rating || black < min_rating {
            stats.below_rating += 1;
            continue;
        }
        let Some(result) = white_outcome(game.result()) else {
            stats.unfinished += 1;
            continue;
        };
        stats.accepted_games += 1;
        let mut board = initial_board(game);
        for mv in &game.moves {
            let outcome = if board.side_to_move() == Color::White { result } else { result.flipped() };
            let next = board.apply_move(mv).expect("games are replayed when parsed");
            tuples.push(TrainingTuple { board, mv: *mv, outcome });
            board = next;
        }
    }
    (tuples, stats)
}

const SHARD_MAGIC: &[u8; 8] = b"SCCTUPL\0";
const SHARD_VERSION: u32 = 1;

/// Little-endian shard: magic, version, count, then per tuple the FEN
/// (u16 length + bytes), both repetition counters, from, to, promotion slot
/// and the mover's result in half points.
pub fn encode_shard(tuples: &[TrainingTuple]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + tuples.len() * 64);
    out.extend_from_slice(SHARD_MAGIC);
    out.extend_from_slice(&SHARD_VERSION.to_le_bytes());
    out.extend_from_slice(&(tuples.len() as u64).to_le_bytes());
    for t in tuples {
        let fen = t.board.to_fen();
        out.extend_from_slice(&(fen.len() as u16).to_le_bytes());
        out.extend_from_slice(fen.as_bytes());
        out.push(t.board.repetition_count().min(255) as u8);
        out.push(t.board.previous_repetition_count().min(255) as u8);
        out.push(t.mv.from.index() as u8);
        out.push(t.mv.to.index() as u8);
        out.push(PieceKind::promotion_slot(t.mv.promotion) as u8);
        out.push(t.outcome.half_points());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| CoreError::Data("truncated shard".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

pub fn decode_shard(bytes: &[u8]) -> Result<Vec<TrainingTuple>> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(8)? != SHARD_MAGIC {
        return Err(CoreError::Data("not a tuple shard".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != SHARD_VERSION {
        return Err(CoreError::Data(format!("unsupported shard version {version}")));
    }
    let count = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
    let mut tuples = Vec::with_capacity(count.min(1 << 20) as usize);
    for i in 0..count {
        let bad = |what: &str| CoreError::Data(format!("shard record {i}: {what}"));
        let len = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes")) as usize;
        let fen = std::str::from_utf8(r.take(len)?).map_err(|_| bad("FEN is not UTF-8"))?;
        let board = Board::from_fen(fen)?;
        let (current, previous) = (r.byte()?, r.byte()?);
        let board = board.with_repetition_counts(current.into(), previous.into());
        let from = Square::from_index(r.byte()?.into()).ok_or_else(|| bad("square"))?;
        let to = Square::from_index(r.byte()?.into()).ok_or_else(|| bad("square"))?;
        let slot = r.byte()? as usize;
        if slot > 4 {
            return Err(bad("promotion slot"));
        }
        let mv = Move::new(from, to, PieceKind::from_promotion_slot(slot));
        let outcome = Outcome::from_half_points(r.byte()?).ok_or_else(|| bad("outcome"))?;
        let mv = *board
            .legal_moves()
            .iter()
            .find(|m| **m == mv)
            .ok_or_else(|| CoreError::MoveNotLegal { mv: mv.to_uci(), fen: fen.to_string() })?;
        tuples.push(TrainingTuple { board, mv, outcome });
    }
    if r.at != bytes.len() {
        return Err(CoreError::Data("trailing bytes after shard".into()));
    }
    Ok(tuples)
}

pub fn write_shard(path: &Path, tuples: &[TrainingTuple]) -> Result<()> {
    std::fs::write(path, encode_shard(tuples)).map_err(|e| CoreError::io(path, e))
}

pub fn read_shard(path: &Path) -> Result<Vec<TrainingTuple>> {
    decode_shard(&std::fs::read(path).map_err(|e| CoreError::io(path, e))?)
}
