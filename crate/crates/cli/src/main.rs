//! `grub`: best-arm identification with graph side information.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Opts, Settings};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "grub", version, about = "Graph-assisted best-arm identification")]
struct Cli {
    /// Worker threads for multi-run batches (capped at the available cores).
    #[arg(long, env = "GRUB_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run GRUB (or ζ-GRUB with --zeta) and write the per-step trace as CSV.
    Run {
        #[command(flatten)]
        opts: Opts,
        /// Ignore the graph edges (graph-free baseline).
        #[arg(long)]
        no_graph: bool,
    },
    /// Per-node minimum influence factors.
    Influence {
        #[command(flatten)]
        opts: Opts,
    },
    /// Arm classes and sample-complexity bounds.
    Complexity {
        #[command(flatten)]
        opts: Opts,
        /// Candidate graph for the γ-relaxed bound; pair each with --gamma.
        #[arg(long)]
        candidate: Vec<PathBuf>,
        #[arg(long)]
        gamma: Vec<f64>,
        /// Use the conservative leading constants (448 / 224) instead of 112 / 112.
        #[arg(long)]
        conservative_constants: bool,
    },
    /// Smallest γ for which the --against graph is γ-close to --graph.
    GammaCheck {
        #[command(flatten)]
        opts: Opts,
        #[arg(long)]
        against: PathBuf,
    },
    /// Materialize a configured synthetic instance as graph, means and manifest files.
    Generate {
        #[command(flatten)]
        opts: Opts,
        /// Output directory.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn configure_threads(requested: Option<usize>) -> CliResult<()> {
    let Some(k) = requested else { return Ok(()) };
    if k == 0 {
        return Err(CliError::Config("GRUB_THREADS must be >= 1".into()));
    }
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(k.min(available))
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Run { opts, no_graph } => commands::run(&Settings::resolve(&opts, no_graph)?),
        Command::Influence { opts } => commands::influence(&Settings::resolve(&opts, false)?),
        Command::Complexity {
            opts,
            candidate,
            gamma,
            conservative_constants,
        } => commands::complexity(
            &Settings::resolve(&opts, false)?,
            commands::CandidateArgs {
                files: &candidate,
                gammas: &gamma,
                conservative_constants,
            },
        ),
        Command::GammaCheck { opts, against } => {
            commands::gamma_check(&Settings::resolve(&opts, false)?, &against)
        }
        Command::Generate { opts, dir } => commands::generate(&Settings::resolve(&opts, false)?, &dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
