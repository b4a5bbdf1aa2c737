//! `d2d-sim`: command-line runner for the street-system connectivity
//! simulations — crossroad occupation grids, percolation-threshold
//! estimates, relay-demand curves, deployment cash flows and raw street
//! dumps.
//!
//! Every run is deterministic under its master seed, writes CSV outputs and
//! a JSON manifest recording the resolved parameters and output digests.
//!
//! Exit status: 0 success, 2 usage or validation error, 3 numerical or
//! finite-size refusal.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{Failure, RunContext};
use config::Config;

#[derive(Parser)]
#[command(
    name = "d2d-sim",
    version,
    about = "Street-system D2D connectivity simulations",
    disable_help_subcommand = true
)]
struct Cli {
    /// Config file (sectioned key = value); defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file's `[street] seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory for CSV files and the run manifest (default `.`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads; overrides `D2D_THREADS` and the config key
    /// (0 = all available).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crossroad occupation probability F(lambda, p) over the configured grids.
    Occupation,
    /// Critical occupation probability at the configured intensity and range.
    Pstar,
    /// Minimal relay fraction against user intensity, both surface conventions.
    RelayCurve,
    /// Monthly cash-flow table and break-even month of the deployment scenario.
    Econ,
    /// One generated street system as vertex and edge CSV files.
    DumpStreets,
}

impl Command {
    fn run(&self, ctx: &RunContext) -> Result<(), Failure> {
        match self {
            Command::Occupation => commands::cmd_occupation(ctx),
            Command::Pstar => commands::cmd_pstar(ctx),
            Command::RelayCurve => commands::cmd_relay_curve(ctx),
            Command::Econ => commands::cmd_econ(ctx),
            Command::DumpStreets => commands::cmd_dump_streets(ctx),
        }
    }
}

fn resolve_threads(flag: Option<usize>, config: &Config) -> Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n);
    }
    if let Ok(text) = std::env::var("D2D_THREADS") {
        let n = text.trim().parse::<usize>().map_err(|e| {
            Failure::Validation(format!("D2D_THREADS must be a nonnegative integer: {e}"))
        })?;
        return Ok(n);
    }
    Ok(config.percolation.threads)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::defaults()?,
    };
    let seed = cli.seed.unwrap_or(config.street.seed);

    let threads = resolve_threads(cli.threads, &config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        pool = pool.num_threads(threads);
    }
    // A second build_global in one process is an error we can ignore: the
    // pool is already up, which is all we need.
    let _ = pool.build_global();
    let effective_threads = rayon::current_num_threads();

    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        Failure::Validation(format!(
            "cannot create output directory {}: {e}",
            out_dir.display()
        ))
    })?;

    let ctx = RunContext {
        config: &config,
        seed,
        out_dir: &out_dir,
        threads: effective_threads,
    };
    cli.command.run(&ctx)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version displays are successful outputs; everything
            // else is a usage error (exit status 2).
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
