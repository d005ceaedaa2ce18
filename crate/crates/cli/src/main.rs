//! Command-line pipeline mirroring the preprocessing-for-OCR workflow, one
//! subcommand per stage: synth, split, tune, apply, ocr, evaluate, compare,
//! errors. Every command is deterministic given its configuration and seed.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 runtime or engine
//! failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ocrtune", version, about = "Tune image pre-processing parameters for OCR")]
struct Cli {
    /// TOML configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on concurrent document evaluations (and external OCR processes).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus (images, transcriptions, manifest).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated typology proportions, e.g. `letter=0.5,other=0.5`.
        #[arg(long)]
        mix: Option<String>,
        #[arg(long)]
        noise_p: Option<f64>,
        #[arg(long)]
        contrast: Option<f64>,
        #[arg(long)]
        background: Option<u8>,
    },
    /// Sample a manifest by archival series and split it into
    /// parameterization and evaluation halves.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_parameterization: PathBuf,
        #[arg(long)]
        out_evaluation: PathBuf,
        /// Skip the series sampling stage and split the manifest as-is.
        #[arg(long)]
        no_sampling: bool,
    },
    /// Tune one operator's parameters over a manifest.
    Tune {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        algorithm: String,
        /// `global` or `typology`.
        #[arg(long, default_value = "global")]
        mode: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Apply an operator under a stored assignment to every image.
    Apply {
        #[arg(long)]
        manifest: PathBuf,
        /// Assignment in text form, or `@file` to read the first line of a file.
        #[arg(long)]
        params: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recognize every image and store the text output.
    Ocr {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate scenarios over a manifest and write per-document records.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated subset of none,default,global,typology.
        #[arg(long, default_value = "none,default")]
        scenarios: String,
        /// Comma-separated operators (default: all fifteen).
        #[arg(long)]
        algorithms: Option<String>,
        /// Directory holding tuned assignments from `tune`.
        #[arg(long)]
        params_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistical comparison reports from an evaluation record file.
    Compare {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Edit-operation error frequency table from an evaluation record file.
    Errors {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failures split into validation (exit 1) and runtime (exit 2).
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl From<ocrtune::Error> for CliError {
    fn from(e: ocrtune::Error) -> Self {
        match e {
            ocrtune::Error::EngineFailure(_) | ocrtune::Error::Io { .. } => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut run_config = match &cli.config {
        Some(path) => config::load(path).map_err(CliError::Validation)?,
        None => config::RunConfig::default(),
    };
    if cli.workers.is_some() {
        run_config.workers = cli.workers;
    }
    if let Some(workers) = run_config.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
    }
    commands::dispatch(cli.command, run_config)
}
