//! `lsgam`: slope-unit landslide susceptibility from the command line.

mod artifact;
mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "lsgam", version, about = "Bayesian slope-unit landslide susceptibility with ground-motion scenarios")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each overrides the configuration file.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Retained posterior draws.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Cross-validation folds.
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Independent sampler chains.
    #[arg(long, global = true)]
    pub chains: Option<usize>,
    /// Worker threads for chains, folds and scenarios; all cores by default.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic study area (rasters, ShakeMaps, landslides) and a
    /// run configuration for it.
    Synth {
        /// Directory receiving the inputs and `config.json`.
        dir: PathBuf,
    },
    /// Aggregate rasters to slope units and write `su_table.csv`.
    Ingest,
    /// Sample the posterior and write `posterior.csv` and `diagnostics.json`.
    Fit {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// k-fold cross-validation with ROC curves.
    Validate {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Swap historical ground motion into the fitted model.
    Simulate {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Directory holding `posterior.csv` and `posterior.json`; the output
        /// directory by default.
        #[arg(long)]
        posterior: Option<PathBuf>,
        /// Additional scenario files (ShakeMap `.xml` or `su_id,pga_g` `.csv`),
        /// named by file stem.
        scenarios: Vec<PathBuf>,
    },
    /// Combine per-scenario summary CSVs into one map.
    Combine {
        /// Summary CSVs written by `simulate`.
        inputs: Vec<PathBuf>,
    },
    /// Frequency-area distribution of landslide areas.
    Fad {
        /// `landslide_id,area_m2` table.
        #[arg(long)]
        areas: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::user("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::internal(format!("thread pool: {e}")))?;
    }
    let common = cli.common;
    match cli.command {
        Command::Synth { dir } => commands::synth(&common, &dir),
        Command::Ingest => commands::ingest(&common),
        Command::Fit { table, model } => commands::fit(&common, table, model),
        Command::Validate { table, model } => commands::validate(&common, table, model),
        Command::Simulate { table, model, posterior, scenarios } => {
            commands::simulate(&common, table, model, posterior, &scenarios)
        }
        Command::Combine { inputs } => commands::combine(&common, &inputs),
        Command::Fad { areas } => commands::fad(&common, areas),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
