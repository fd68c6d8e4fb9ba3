use std::io::BufRead;

use scc_chess::{parse_move_text, Board, Move};
use serde::Deserialize;

use super::vocab::Vocabulary;
use crate::commentary::CommentCategory;
use crate::error::{CoreError, Result};

/// Lowercases and splits on whitespace; every character that is neither
/// alphanumeric nor whitespace becomes a token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// One aligned (position, move, comment) row before vocabulary lookup.
#[derive(Clone, Debug, PartialEq)]
pub struct CommentRecord {
    pub game_id: String,
    pub board: Board,
    pub mv: Move,
    pub category: CommentCategory,
    pub words: Vec<String>,
}

/// A record ready for training: word ids ending with the end marker.
#[derive(Clone, Debug, PartialEq)]
pub struct CommentarySample {
    pub game_id: String,
    pub board: Board,
    pub mv: Move,
    pub category: CommentCategory,
    pub tokens: Vec<usize>,
}

impl CommentRecord {
    pub fn to_sample(&self, vocab: &Vocabulary, max_len: usize) -> CommentarySample {
        CommentarySample {
            game_id: self.game_id.clone(),
            board: self.board.clone(),
            mv: self.mv,
            category: self.category,
            tokens: vocab.encode(&self.words, max_len),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowRejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetLoad {
    pub records: Vec<CommentRecord>,
    pub skipped_general: usize,
    pub rejected: Vec<RowRejection>,
}

fn parse_row(line: &str) -> std::result::Result<Option<CommentRecord>, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 5 {
        return Err(format!("expected 5 tab-separated columns, found {}", cols.len()));
    }
    let category = cols[3].trim();
    if category.eq_ignore_ascii_case("general") {
        return Ok(None);
    }
    let category: CommentCategory = category.parse().map_err(|e: CoreError| e.to_string())?;
    let board = Board::from_fen(cols[1].trim()).map_err(|e| format!("FEN: {e}"))?;
    let mv = parse_move_text(&board, cols[2].trim()).map_err(|e| format!("move: {e}"))?;
    let words = tokenize(cols[4]);
    if words.is_empty() {
        return Err("empty comment".into());
    }
    Ok(Some(CommentRecord { game_id: cols[0].trim().to_string(), board, mv, category, words }))
}

/// Reads `game-id, FEN, UCI move, category, text` rows. Blank lines and
/// lines starting with `#` are ignored; "general" rows are counted and
/// skipped; malformed rows are rejected with their 1-based line number.
pub fn load_commentary<R: BufRead>(reader: R) -> Result<DatasetLoad> {
    let mut load = DatasetLoad::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CoreError::Data(format!("line {}: {e}", i + 1)))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_row(&line) {
            Ok(Some(r)) => load.records.push(r),
            Ok(None) => load.skipped_general += 1,
            Err(reason) => load.rejected.push(RowRejection { line: i + 1, reason }),
        }
    }
    Ok(load)
}

#[derive(Deserialize)]
struct JsonRow {
    game_id: serde_json::Value,
    fen: String,
    #[serde(alias = "uci")]
    r#move: String,
    category: String,
    #[serde(alias = "text")]
    comment: String,
}

/// Converts JSON lines with `game_id`, `fen`, `move`, `category` and
/// `comment` fields into the TSV layout read by [`load_commentary`]. Tabs
/// and newlines inside fields become spaces.
pub fn jsonl_to_tsv<R: BufRead>(reader: R) -> Result<String> {
    let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
    let mut out = String::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CoreError::Data(format!("line {}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&line).map_err(|e| CoreError::Data(format!("line {}: {e}", i + 1)))?;
        let game_id = match row.game_id {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        out.push_str(
            &[clean(&game_id), clean(&row.fen), clean(&row.r#move), clean(&row.category), clean(&row.comment)]
                .join("\t"),
        );
        out.push('\n');
    }
    Ok(out)
}
