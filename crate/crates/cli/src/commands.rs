use std::io::Write;
use std::path::{Path, PathBuf};

use scc_chess::{parse_move_text, Board};
use scc_core::commentary::{
    train_bundle, Bundle, BundleTrainOptions, CommentCategory, CommentaryConfig, CommentaryTrainConfig, TrainMode,
};
use scc_core::data::{extract_engine_tuples, load_commentary_dir, parse_pgn};
use scc_core::engine::{
    games_to_pgn, gate, self_play, train_supervised, write_loss_curve, Engine, EngineConfig, GateConfig,
    SelfPlayConfig, TrainConfig,
};
use scc_core::eval::{group_by_label, pair_lines, read_lines, report, Metric};
use scc_nn::OptimizerConfig;

use crate::args::{CommentTrainArgs, EngineTrainArgs, EvalArgs, GateArgs, GenerateArgs, SelfplayArgs};
use crate::CliError;

type CliResult = Result<(), CliError>;

fn say(out: &mut dyn Write, text: std::fmt::Arguments) -> CliResult {
    out.write_fmt(text).and_then(|_| out.write_all(b"\n")).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// `all` or one category name.
pub(crate) fn categories_arg(text: &str) -> Result<Vec<CommentCategory>, CliError> {
    if text == "all" {
        return Ok(CommentCategory::ALL.to_vec());
    }
    text.parse::<CommentCategory>().map(|c| vec![c]).map_err(|e| CliError::Usage(e.to_string()))
}

fn pgn_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgn")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn engine_train(a: &EngineTrainArgs, out: &mut dyn Write) -> CliResult {
    let mut games = Vec::new();
    let mut rejected = 0;
    for file in pgn_files(&a.pgn)? {
        let text = std::fs::read_to_string(&file).map_err(|e| CliError::io(&file, e))?;
        let parsed = parse_pgn(&text);
        for r in &parsed.rejected {
            log::warn!("{}: game {} rejected: {}", file.display(), r.index, r.reason);
        }
        rejected += parsed.rejected.len();
        games.extend(parsed.games);
    }
    let (tuples, stats) = extract_engine_tuples(&games, a.min_rating);
    say(
        out,
        format_args!(
            "games: {} parsed, {} rejected, {} accepted ({} below rating, {} unrated, {} unfinished); {} tuples",
            games.len(),
            rejected,
            stats.accepted_games,
            stats.below_rating,
            stats.missing_rating,
            stats.unfinished,
            tuples.len()
        ),
    )?;
    let mut engine = match &a.init {
        Some(path) => Engine::load(path)?,
        None => Engine::new(EngineConfig::default(), a.seed)?,
    };
    let config = TrainConfig {
        steps: a.steps,
        batch_size: a.batch_size,
        optimizer: OptimizerConfig::adam(a.learning_rate),
        seed: a.seed,
    };
    let losses = train_supervised(&mut engine, &tuples, &config)?;
    if let Some(curve) = &a.loss_curve {
        write_loss_curve(curve, &losses)?;
    }
    let hash = engine.save(&a.out)?;
    say(
        out,
        format_args!(
            "final loss {:.4}; saved {} ({hash})",
            losses.last().copied().unwrap_or(f64::NAN),
            a.out.display()
        ),
    )
}

pub fn engine_selfplay(a: &SelfplayArgs, out: &mut dyn Write) -> CliResult {
    let engine = Engine::load(&a.ckpt)?;
    let config = SelfPlayConfig { seed: a.seed, ..SelfPlayConfig::default() };
    let games = self_play(&engine, a.games, &config)?;
    let pgn = games_to_pgn(&games, &engine.model_id()?, a.seed)?;
    std::fs::write(&a.out, pgn).map_err(|e| CliError::io(&a.out, e))?;
    say(out, format_args!("{} games written to {}", games.len(), a.out.display()))
}

pub fn engine_gate(a: &GateArgs, out: &mut dyn Write) -> CliResult {
    let candidate = Engine::load(&a.candidate)?;
    let incumbent = Engine::load(&a.incumbent)?;
    let config = GateConfig { games: a.games, threshold: a.threshold, ..GateConfig::default() };
    let r = gate(&candidate, &incumbent, &config)?;
    say(
        out,
        format_args!(
            "wins {} draws {} losses {}; score {:.4} vs threshold {}: {}",
            r.wins,
            r.draws,
            r.losses,
            r.rate(),
            r.threshold,
            if r.accepted { "accepted" } else { "rejected" }
        ),
    )
}

pub fn comment_train(a: &CommentTrainArgs, out: &mut dyn Write) -> CliResult {
    let mode: TrainMode = a.mode.parse().map_err(|e: scc_core::CoreError| CliError::Usage(e.to_string()))?;
    let categories = categories_arg(&a.category)?;
    let load = load_commentary_dir(&a.data)?;
    for r in &load.rejected {
        log::warn!("row {} rejected: {}", r.line, r.reason);
    }
    say(
        out,
        format_args!(
            "{} comments loaded, {} general skipped, {} rejected",
            load.records.len(),
            load.skipped_general,
            load.rejected.len()
        ),
    )?;
    let engine = Engine::load(&a.engine)?;
    let options = BundleTrainOptions {
        model: CommentaryConfig { engine_loss_weight: a.engine_loss_weight, ..CommentaryConfig::default() },
        training: CommentaryTrainConfig {
            steps: a.steps,
            batch_size: a.batch_size,
            seed: a.seed,
            freeze_engine: a.freeze_engine,
            ..CommentaryTrainConfig::default()
        },
        horizon: a.horizon,
        split_seed: a.seed,
        ..BundleTrainOptions::default()
    };
    let trained = train_bundle(&load.records, &engine, mode, &categories, &options)?;
    trained.bundle.save(&a.out, Some(&trained.split))?;
    for (cats, r) in &trained.reports {
        let names: Vec<String> = cats.iter().map(|c| c.to_string()).collect();
        say(
            out,
            format_args!(
                "{}: final train loss {:.4}, best validation {:?} at step {:?}",
                names.join(","),
                r.losses.last().copied().unwrap_or(f64::NAN),
                r.validation.iter().map(|v| v.1).reduce(f64::min),
                r.best_step
            ),
        )?;
    }
    say(out, format_args!("bundle {} written to {}", trained.bundle.model_id(), a.out.display()))
}

pub fn comment_generate(a: &GenerateArgs, out: &mut dyn Write) -> CliResult {
    let bundle = Bundle::load(&a.bundle)?;
    let board = Board::from_fen(&a.fen)?;
    let mv = parse_move_text(&board, &a.mv)?;
    let categories = categories_arg(&a.category)?;
    let mut generation = bundle.manifest.generation;
    if let Some(beam) = a.beam {
        generation.beam_width = beam;
    }
    let horizon = a.horizon.unwrap_or(bundle.manifest.horizon);
    let output = bundle.comment(&board, &mv, &categories, &generation, horizon)?;
    if a.json {
        return say(out, format_args!("{}", serde_json::to_string_pretty(&output).expect("output serialises")));
    }
    for c in &output.comments {
        match (&c.text, &c.error) {
            (Some(text), _) => say(out, format_args!("{}: {text}", c.category))?,
            (None, Some(e)) => say(out, format_args!("{}: (unavailable: {e})", c.category))?,
            (None, None) => {}
        }
    }
    say(out, format_args!("win rate (White): {:.4} -> {:.4}", output.win_rate_before, output.win_rate_after))?;
    say(
        out,
        format_args!(
            "engine alternative: {}{}",
            output.best_alternative,
            if output.only_move { " (only move)" } else { "" }
        ),
    )?;
    say(out, format_args!("continuation: {}", output.rollout.join(" ")))?;
    say(out, format_args!("model: {}", output.model_id))
}

pub fn eval(a: &EvalArgs, out: &mut dyn Write) -> CliResult {
    let metric: Metric = a.metric.parse().map_err(|e: scc_core::CoreError| CliError::Usage(e.to_string()))?;
    let pairs = pair_lines(&read_lines(&a.hyps)?, &read_lines(&a.refs)?)?;
    match &a.by_category {
        None => say(out, format_args!("{:.4}", metric.score(&pairs)?)),
        Some(labels) => {
            let groups = group_by_label(pairs, &read_lines(labels)?)?;
            let table = report(&groups)?.to_table();
            out.write_all(table.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
