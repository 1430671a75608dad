//! `coalnet` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status for configuration problems (unreadable, malformed or invalid).
pub const EXIT_CONFIG: u8 = 3;
/// Exit status when an internal invariant is breached.
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "coalnet",
    version,
    about = "Coalition analysis of cooperative vehicle/RSU transmission"
)]
pub struct Cli {
    /// Scenario file (TOML). Defaults to the built-in reference scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed; overrides the scenario's geometry seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of simulated slots; overrides the scenario's geometry slots.
    #[arg(long, global = true)]
    slots: Option<u64>,

    /// Output CSV path; a `<out>.manifest.json` is written next to it.
    /// Without it, CSV goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Coalition structure: canonical id, a `C1`..`C15` label (2 vehicles,
    /// 2 RSUs), `grand`, `singletons`, or explicit like `{1,2},{3},{4}`.
    #[arg(long, global = true)]
    structure: Option<String>,

    /// Comma-separated ranges in km, e.g. `0.1,0.2,0.3`.
    #[arg(long, global = true, value_delimiter = ',')]
    d_sweep: Option<Vec<f64>>,

    /// Node placement: `continuous` or `grid`.
    #[arg(long, global = true)]
    placement: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List all coalition structures with ids and normalized forms.
    Enumerate,
    /// Estimate encounter probabilities over a sweep of ranges.
    Encounter,
    /// Analytic payoffs of a structure, over a range sweep or the scenario's
    /// encounter matrix.
    Payoffs {
        /// Use the scenario's encounter matrix instead of the range sweep.
        #[arg(long)]
        use_matrix: bool,
    },
    /// Sufficient conditions and core membership of the grand-coalition
    /// payoffs.
    Core,
    /// Slot-level simulation compared with analytic values.
    Simulate {
        /// Draw encounters from node positions instead of the matrix.
        #[arg(long)]
        geometric: bool,
    },
    /// Run every invariant on the scenario and print one line per check.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(output::exit_code(&err))
        }
    }
}
