//! Batch pipeline around the `volsent` models: ingest prices and headlines,
//! train the sentiment classifier, fit and forecast every enabled model,
//! score the forecasts and emit plot data.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod fixture;
pub mod pipeline;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "volsent", version, about = "Volatility forecasting pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "volsent.toml")]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Volatility proxy, returns and encoded headlines.
    Ingest,
    /// word2vec embeddings, CNN classifier and daily sentiment.
    TrainSentiment,
    /// Fit enabled models and forecast the test period.
    Forecast,
    /// RMSE and F-test table for every forecast file.
    Evaluate,
    /// Actual-versus-predicted overlays.
    Plot,
    /// Every stage in order.
    All,
}

/// Loads the config named by `cli` and applies the command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Ingest => pipeline::ingest(&cfg),
        Command::TrainSentiment => pipeline::train_sentiment(&cfg),
        Command::Forecast => pipeline::forecast(&cfg),
        Command::Evaluate => pipeline::evaluate(&cfg),
        Command::Plot => pipeline::plot(&cfg),
        Command::All => pipeline::all(&cfg),
    }
}

/// Parses `args` (program name first) and runs; usage errors are config
/// errors.
pub fn run_from_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::config(e.to_string().trim_end()))?;
    run(&cli)
}
