//! `factspan`: generate factuality training data, train and apply arc-level
//! factuality models, evaluate them and mask summarization targets.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "factspan", version, about = "Dependency-level factuality toolkit")]
struct Cli {
    /// Log verbosity (-v info, -vv debug). Logs go to standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Root seed; every random choice derives from it.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Skip malformed input lines instead of aborting.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corrupt claims into entity-centric training examples.
    GenEntc(commands::GenEntcArgs),
    /// Label low-ranked paraphrases of gold summaries at the arc level.
    GenGenc(commands::GenGencArgs),
    /// Fill in missing label granularities.
    Derive(commands::DeriveArgs),
    /// Train a sentence-level or arc-level factuality model.
    Train(commands::TrainArgs),
    /// Apply a trained model to a corpus.
    Predict(commands::PredictArgs),
    /// Score predictions against gold labels.
    Eval(commands::EvalArgs),
    /// Hold out one generation model.
    Split(commands::SplitArgs),
    /// Evaluate every saved checkpoint on named sets.
    Curve(commands::CurveArgs),
    /// Export masked summarization targets.
    Mask(commands::MaskArgs),
    /// Error-taxonomy distribution of an annotated corpus.
    TaxonomyStats(commands::TaxonomyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version exit 0; usage errors exit 2.
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    let result = match cli.command {
        Command::GenEntc(a) => commands::gen_entc(a),
        Command::GenGenc(a) => commands::gen_genc(a),
        Command::Derive(a) => commands::derive(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Eval(a) => commands::eval(a),
        Command::Split(a) => commands::split(a),
        Command::Curve(a) => commands::curve(a),
        Command::Mask(a) => commands::mask(a),
        Command::TaxonomyStats(a) => commands::taxonomy_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
