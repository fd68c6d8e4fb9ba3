use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const CATEGORY_CHOICES: [&str; 6] = ["all", "description", "quality", "comparison", "planning", "contexts"];

#[derive(Debug, Parser)]
#[command(
    name = "scc",
    version,
    about = "Chess commentary: engine training, comment generation, evaluation and serving"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train, self-play and gate the chess engine.
    #[command(subcommand)]
    Engine(EngineCommand),
    /// Train commentary models and generate comments.
    #[command(subcommand)]
    Comment(CommentCommand),
    /// Score generated comments against references.
    Eval(EvalArgs),
    /// Serve the JSON inference API.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum EngineCommand {
    Train(EngineTrainArgs),
    Selfplay(SelfplayArgs),
    Gate(GateArgs),
}

#[derive(Debug, Args)]
pub struct EngineTrainArgs {
    /// PGN file, or a directory of .pgn files.
    #[arg(long)]
    pub pgn: PathBuf,
    /// Both players must be rated at least this much.
    #[arg(long)]
    pub min_rating: u32,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from this checkpoint instead of a fresh network.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    /// Also write `step,loss` lines here.
    #[arg(long)]
    pub loss_curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelfplayArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub games: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    #[arg(long)]
    pub candidate: PathBuf,
    #[arg(long)]
    pub incumbent: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub games: usize,
    #[arg(long, default_value_t = 0.55)]
    pub threshold: f64,
}

#[derive(Debug, Subcommand)]
pub enum CommentCommand {
    Train(CommentTrainArgs),
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CommentTrainArgs {
    /// Directory of commentary TSV files.
    #[arg(long)]
    pub data: PathBuf,
    /// Pre-trained engine checkpoint.
    #[arg(long)]
    pub engine: PathBuf,
    #[arg(long, value_parser = ["single", "mult"])]
    pub mode: String,
    #[arg(long, value_parser = CATEGORY_CHOICES)]
    pub category: String,
    /// Output bundle directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub horizon: usize,
    /// Keep the engine trunk fixed.
    #[arg(long)]
    pub freeze_engine: bool,
    /// Weight of the engine's policy loss during fine-tuning.
    #[arg(long, default_value_t = 0.0)]
    pub engine_loss_weight: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub fen: String,
    #[arg(long = "move")]
    pub mv: String,
    #[arg(long, value_parser = CATEGORY_CHOICES)]
    pub category: String,
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Print the full record as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub hyps: PathBuf,
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long, value_parser = ["bleu2", "bleu4", "meteor_s"])]
    pub metric: String,
    /// One category label per line; prints a per-category table.
    #[arg(long)]
    pub by_category: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}
