//! The `scc` command line and the JSON inference service.

pub mod args;
mod commands;
pub mod service;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use scc_core::CoreError;
use thiserror::Error;

use args::{Cli, Command, CommentCommand, EngineCommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Chess(#[from] scc_chess::ChessError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_DATA,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> CliError {
        CliError::Io { path: path.display().to_string(), source }
    }
}

/// Runs one command line. Results go to `out`, diagnostics to `err`.
/// Returns the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Engine(EngineCommand::Train(a)) => commands::engine_train(&a, out),
        Command::Engine(EngineCommand::Selfplay(a)) => commands::engine_selfplay(&a, out),
        Command::Engine(EngineCommand::Gate(a)) => commands::engine_gate(&a, out),
        Command::Comment(CommentCommand::Train(a)) => commands::comment_train(&a, out),
        Command::Comment(CommentCommand::Generate(a)) => commands::comment_generate(&a, out),
        Command::Eval(a) => commands::eval(&a, out),
        Command::Serve(a) => service::run(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
