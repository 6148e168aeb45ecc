//! Library side of the `swapsim` binary: configuration, the shared
//! simulate-and-reconstruct pipeline and the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Swap,
    Tomography,
    SweepVisibility,
    HomScan,
    Assemble4d,
    Purify,
}

#[derive(Debug, Parser)]
#[command(name = "swapsim", version, about = "OAM entanglement-swapping simulator")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides output_dir in the config (default: `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loads the config, applies overrides and runs one subcommand. Returns the
/// path of the report written.
pub fn run(args: &Args) -> Result<PathBuf, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = output::OutputDir::create(&out_dir)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    match args.command {
        Command::Swap => commands::swap(&cfg, &out),
        Command::Tomography => commands::tomography(&cfg, &out),
        Command::SweepVisibility => commands::sweep_visibility(&cfg, &out),
        Command::HomScan => commands::hom_scan(&cfg, &out),
        Command::Assemble4d => commands::assemble4d(&cfg, &out, base),
        Command::Purify => commands::purify(&cfg, &out),
    }
}
