//! `uamm-lab`: quotes, simulations and probes for fair-price anchored betting pools.

mod probe;
mod quote;
mod schema;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status for bad flags, unreadable configs and rejected inputs.
const EXIT_USAGE: u8 = 1;
/// Exit status when a conservation or property check fails.
const EXIT_INVARIANT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "uamm-lab", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price one bet against a freshly funded pool.
    Quote(quote::QuoteArgs),
    /// Run a seeded experiment and write CSV tables and plot data.
    #[command(after_long_help = schema::SIMULATE_HELP)]
    Simulate(simulate::SimulateArgs),
    /// Check liquidity properties and measure swap-curve continuity.
    Probe(probe::ProbeArgs),
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Invariant(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<uamm_core::Error>() {
            Some(uamm_core::Error::Invariant(_)) => Failure::Invariant(e),
            _ => Failure::Usage(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Quote(args) => quote::run(&args).map_err(Failure::from),
        Command::Simulate(args) => simulate::run(&args).map_err(Failure::from),
        Command::Probe(args) => probe::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Invariant(e)) => {
            eprintln!("invariant violation: {e:#}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}
