//! Batch front end for the library: loads declarative JSON scenarios, runs
//! named property-check suites, integrates trajectories to CSV, and emits
//! reduction reports.  All output is machine-readable and byte-deterministic
//! for a fixed scenario and seed: JSON with stable key order, CSV with
//! shortest round-trip float formatting, and no timestamps anywhere.
//!
//! Exit codes: 0 when everything passed, 1 when a property or reduction
//! check failed, 2 for input errors (unparseable scenario, unknown suite,
//! unresolved name, or a precondition such as reducing at a momentum that
//! is not a fixed point).

mod output;
mod scenario;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown suite '{0}' (try `info` for the list, or 'all')")]
    UnknownSuite(String),
    #[error("unresolved reference: {0}")]
    UnresolvedReference(String),
    #[error(transparent)]
    Domain(#[from] bundlemech::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser)]
#[command(
    name = "bundlemech",
    about = "Property checks, simulations, and reductions for gauge-bundle mechanics scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named property-check suite (or "all") against a scenario.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        suite: String,
        /// Overrides the scenario's seed for everything derived from it.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integrate one of the scenario's runs and write CSV plus a JSON sidecar.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        run: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare one run's projected flow against the reduced oracle.
    Reduce {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        run: String,
    },
    /// Summarize a scenario: named objects, runs, and available suites.
    Info {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Check {
            scenario,
            suite,
            seed,
        } => {
            let sc = scenario::load(&scenario, seed)?;
            let report = suites::run_check(&sc, &suite)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Simulate { scenario, run, out } => {
            let sc = scenario::load(&scenario, None)?;
            let resolved = sc
                .runs
                .get(&run)
                .ok_or_else(|| CliError::UnresolvedReference(format!("run '{run}'")))?;
            let (csv, sidecar) = output::write_simulation(resolved, &run, &out)?;
            println!("wrote {} and {}", csv.display(), sidecar.display());
            Ok(0)
        }
        Command::Reduce { scenario, run } => {
            let sc = scenario::load(&scenario, None)?;
            let resolved = sc
                .runs
                .get(&run)
                .ok_or_else(|| CliError::UnresolvedReference(format!("run '{run}'")))?;
            let (json, pass) = output::reduce_report(resolved, &run)?;
            println!("{json}");
            Ok(if pass { 0 } else { 1 })
        }
        Command::Info { scenario } => {
            let sc = scenario::load(&scenario, None)?;
            println!("{}", scenario::info_json(&sc)?);
            Ok(0)
        }
    }
}
