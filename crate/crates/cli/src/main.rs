//! `homspace`: run integrations, convergence studies, algebra classification
//! and the acceptance suite from the command line.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "homspace", version, about = "Equivariant integrators on homogeneous spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write the trajectory as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for outputs (file names from the config are kept).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence table over the config's step list.
    Orders {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a split given as a basis file.
    Classify {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Acceptance {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Swap in a corrupted Stiefel connection; the suite must fail.
        #[arg(long)]
        inject_corruption: bool,
        /// Run only these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List skeletons, motions, fields and space families.
    List,
}

/// Exit 1 for failed checks or integrations, 2 for bad input.
pub enum Failure {
    Check(anyhow::Error),
    Usage(anyhow::Error),
}

fn load(path: &Path) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let cfg = ExperimentConfig::load(path).map_err(Failure::Usage)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let (cfg, base) = load(&config)?;
            commands::run(&cfg, seed.unwrap_or(cfg.seed), &base, out.as_deref())
        }
        Command::Orders { config, seed, out } => {
            let (cfg, base) = load(&config)?;
            commands::orders(&cfg, seed.unwrap_or(cfg.seed), &base, out.as_deref())
        }
        Command::Classify { file, out } => commands::classify(&file, out.as_deref()),
        Command::Acceptance {
            seed,
            inject_corruption,
            only,
            out,
        } => commands::acceptance(seed, inject_corruption, &only, out.as_deref()),
        Command::List => {
            commands::list();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
