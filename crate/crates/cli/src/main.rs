//! Experiment front end for the Lookahead game-dynamics toolkit.
//!
//! Subcommands: `simulate` (discrete runs over a hyperparameter grid),
//! `check` (convergence-condition tables), `fig3` (condition-error sweep
//! over the mixing parameter), `poles` (dominant poles and Routh verdicts
//! per model), and `reproduce-all`. Exit codes: 0 success, 2 configuration
//! error, 3 I/O error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::Config;
use error::{CliError, Result};

#[derive(Parser)]
#[command(name = "lagame", version, about = "Lookahead dynamics on min-max games: runs, conditions, poles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run discrete Lookahead over a (k, alpha, gamma) grid
    Simulate {
        /// Experiment config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in protocol: fig2-left | fig2-right
        #[arg(long)]
        preset: Option<String>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG plot
        #[arg(long)]
        svg: bool,
        /// Random starting point on the unit sphere with this seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a convergence condition over a grid
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Condition-error sweep over the mixing parameter beta
    Fig3 {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
    /// Dominant poles and Routh verdicts for a model
    Poles {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both figure presets, the beta sweep, and a pole table
    ReproduceAll {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(config: Option<PathBuf>, preset: Option<String>) -> Result<Config> {
    match (config, preset) {
        (Some(_), Some(_)) => Err(CliError::config("give either --config or --preset, not both")),
        (Some(path), None) => Config::from_file(&path),
        (None, Some(name)) => commands::preset(&name),
        (None, None) => Err(CliError::config("need --config or --preset")),
    }
}

fn run() -> Result<Vec<String>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            preset,
            out,
            svg,
            seed,
        } => {
            let cfg = load(config, preset)?;
            commands::simulate(&cfg, &commands::out_dir(out), svg, seed)
        }
        Command::Check { config, out } => {
            let cfg = Config::from_file(&config)?;
            commands::check(&cfg, &commands::out_dir(out))
        }
        Command::Fig3 { config, out, svg } => {
            let cfg = match config {
                Some(path) => Config::from_file(&path)?,
                None => Config::default(),
            };
            commands::fig3(&cfg, &commands::out_dir(out), svg)
        }
        Command::Poles { config, out } => {
            let cfg = match config {
                Some(path) => Config::from_file(&path)?,
                None => Config::parse("model = la-bg\nk = 5\nalpha = 0.5\nalpha = 0.9\ngamma = 0.1\nlambda = 1\n")?,
            };
            commands::poles(&cfg, &commands::out_dir(out))
        }
        Command::ReproduceAll { out, svg, seed } => {
            commands::reproduce_all(&commands::out_dir(out), svg, seed)
        }
    }
}

fn main() {
    match run() {
        Ok(written) => {
            for path in written {
                println!("wrote {path}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
