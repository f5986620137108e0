//! `dab`: run detection-augmented bandit experiments and write CSV results.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Config, ConfigError};

#[derive(Parser)]
#[command(version, about = "Detection-augmented bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Base seed; overrides `seed` from the file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; overrides `workers` from the file.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Extra `key=value` override, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One scenario (the first `xi`, or `instance`) for every combo.
    Run,
    /// Every combo across the `xi` grid.
    Sweep,
    /// Detector-only latency and false-alarm Monte Carlo.
    DetectBench,
    /// Separation condition on generated instances.
    CheckCondition,
    /// Re-run one trial and write its step-by-step record.
    Replay,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl From<dab_core::Error> for CliError {
    fn from(e: dab_core::Error) -> Self {
        match e {
            dab_core::Error::Config(m) => CliError::Config(ConfigError::Invalid(m)),
            e @ dab_core::Error::Parse { .. } => CliError::Config(ConfigError::Invalid(e.to_string())),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for pair in &cli.overrides {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(w) = cli.workers {
        cfg.set("workers", &w.to_string())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| match cli.command {
        Command::Run => commands::run(&cfg, &cli.out),
        Command::Sweep => commands::sweep(&cfg, &cli.out),
        Command::DetectBench => commands::detect_bench(&cfg, &cli.out),
        Command::CheckCondition => commands::check_condition(&cfg, &cli.out),
        Command::Replay => commands::replay(&cfg, &cli.out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Runtime(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
