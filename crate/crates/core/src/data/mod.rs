//! Game and commentary ingestion: PGN parsing, engine tuples, the comment
//! TSV, vocabulary and game-level splits.

mod dataset;
mod pgn;
mod split;
mod tuples;
pub mod vocab;

use std::path::Path;

pub use dataset::{
    jsonl_to_tsv, load_commentary, tokenize, CommentRecord, CommentarySample, DatasetLoad, RowRejection,
};
pub use pgn::{initial_board, parse_pgn, PgnGame, PgnParse, Rejection};
pub use split::{SplitManifest, SplitPart};
pub use tuples::{decode_shard, encode_shard, extract_engine_tuples, read_shard, write_shard, ExtractStats};
pub use vocab::Vocabulary;

use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VocabConfig {
    pub min_frequency: usize,
    pub max_size: usize,
    /// Longest comment kept, in words, before the end marker.
    pub max_len: usize,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig { min_frequency: 2, max_size: 20000, max_len: 50 }
    }
}

/// Split, vocabulary (built on the training games only) and encoded samples.
#[derive(Clone, Debug)]
pub struct PreparedCommentary {
    pub vocab: Vocabulary,
    pub split: SplitManifest,
    pub train: Vec<CommentarySample>,
    pub valid: Vec<CommentarySample>,
    pub test: Vec<CommentarySample>,
}

pub fn prepare_commentary(records: &[CommentRecord], seed: u64, config: &VocabConfig) -> PreparedCommentary {
    let split = SplitManifest::by_game(records.iter().map(|r| r.game_id.as_str()), seed);
    let part = |p| split.select(records, p, |r: &CommentRecord| r.game_id.as_str());
    let train_records = part(SplitPart::Train);
    let vocab =
        Vocabulary::build(train_records.iter().map(|r| r.words.as_slice()), config.min_frequency, config.max_size);
    let encode =
        |rs: Vec<&CommentRecord>| rs.into_iter().map(|r| r.to_sample(&vocab, config.max_len)).collect::<Vec<_>>();
    let train = encode(train_records);
    let valid = encode(part(SplitPart::Valid));
    let test = encode(part(SplitPart::Test));
    PreparedCommentary { vocab, split, train, valid, test }
}

/// Loads every `*.tsv` file in `dir` in file-name order.
pub fn load_commentary_dir(dir: &Path) -> Result<DatasetLoad> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CoreError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CoreError::Data(format!("no .tsv files in {}", dir.display())));
    }
    let mut all = DatasetLoad::default();
    for path in paths {
        let file = std::fs::File::open(&path).map_err(|e| CoreError::io(&path, e))?;
        let load = load_commentary(std::io::BufReader::new(file))?;
        all.records.extend(load.records);
        all.skipped_general += load.skipped_general;
        all.rejected.extend(load.rejected);
    }
    Ok(all)
}
