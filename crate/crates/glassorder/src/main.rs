use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use glassorder::commands;
use glassorder::config::Config;
use glassorder::pool;

#[derive(Parser, Debug)]
#[command(name = "glassorder", version, about = "Spin-glass order parameters at desk scale")]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `model.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact one-, two- and three-replica free energies.
    Enumerate {
        /// Also write every disorder realization as JSON.
        #[arg(long)]
        save_disorder: bool,
    },
    /// Order-parameter estimates per lattice size.
    Orderparams,
    /// Random energy model tables and finite-N samples.
    Rem,
    /// Coupled-replica parallel tempering with checkpoints.
    Mc {
        /// Stop every run after this many sweeps, leaving a checkpoint.
        #[arg(long)]
        stop_after: Option<u64>,
    },
    /// Run the check battery; exits 1 if any check fails.
    Verify,
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.model.seed = s;
    }
    let out = cli.out.clone();
    pool::with_threads(cli.threads, move || match cli.command {
        Command::Enumerate { save_disorder } => commands::enumerate(&cfg, &out, save_disorder),
        Command::Orderparams => commands::orderparams(&cfg, &out),
        Command::Rem => commands::rem(&cfg, &out),
        Command::Mc { stop_after } => commands::mc(&cfg, &out, stop_after),
        Command::Verify => commands::verify(&cfg, &out),
    })?
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
