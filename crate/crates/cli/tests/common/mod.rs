#![allow(dead_code)]

use std::path::Path;

use scc_chess::{parse_move_text, Board};
use scc_core::commentary::{
    train_bundle, BundleTrainOptions, CommentCategory, CommentaryConfig, CommentaryTrainConfig, GenerationConfig,
    TrainMode,
};
use scc_core::data::{CommentRecord, VocabConfig};
use scc_core::engine::{Engine, EngineConfig};

pub fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = scc_cli::run_cli(std::iter::once("scc").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn tiny_engine(seed: u64) -> Engine {
    Engine::new(EngineConfig::tiny(), seed).unwrap()
}

/// Toy comments on a few opening moves, spread over all categories.
pub fn toy_records(games: usize) -> Vec<CommentRecord> {
    let lines = [
        ("e2e4", "white opens the centre"),
        ("d2d4", "white takes space"),
        ("g1f3", "white develops the knight"),
        ("c2c4", "white plays the english"),
    ];
    let mut out = Vec::new();
    for game in 0..games {
        for (i, (uci, text)) in lines.iter().enumerate() {
            let board = Board::start();
            let mv = parse_move_text(&board, uci).unwrap();
            out.push(CommentRecord {
                game_id: format!("game{game}"),
                board,
                mv,
                category: CommentCategory::ALL[(game + i) % 5],
                words: text.split(' ').map(String::from).collect(),
            });
        }
    }
    out
}

/// Trains a small bundle over every category and writes it to `dir`.
pub fn write_tiny_bundle(dir: &Path, mode: TrainMode) -> String {
    let options = BundleTrainOptions {
        model: CommentaryConfig::tiny(),
        training: CommentaryTrainConfig { steps: 20, batch_size: 2, ..CommentaryTrainConfig::default() },
        vocab: VocabConfig { min_frequency: 1, ..VocabConfig::default() },
        horizon: 3,
        split_seed: 1,
        generation: GenerationConfig::greedy(),
    };
    let trained = train_bundle(&toy_records(20), &tiny_engine(5), mode, &CommentCategory::ALL, &options).unwrap();
    trained.bundle.save(dir, Some(&trained.split)).unwrap();
    trained.bundle.model_id().to_string()
}
