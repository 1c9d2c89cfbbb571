//! `hiercache`: simulate, sweep and compare hierarchical coded caching.

mod compare;
mod demands;
mod exit;
mod output;
mod region;
mod settings;
mod simulate;
mod sweep;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::exit::CliResult;
use crate::settings::{Common, Settings};

#[derive(Parser, Debug)]
#[command(name = "hiercache", version, about = "Two-layer hierarchical coded caching simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Place, deliver and decode one demand vector byte by byte
    Simulate,
    /// Closed-form rates over a parameter grid, as CSV
    Sweep,
    /// Proposed scheme against the baselines at one global memory
    Compare,
    /// Classify the t = K2 memory point among the KNMD regions
    Region,
    /// Exhaustive decoding, oracle and closed-form checks
    Verify,
}

fn run(cli: Cli) -> CliResult<()> {
    let s = Settings::resolve(&cli.common)?;
    match cli.cmd {
        Command::Simulate => simulate::run(&s),
        Command::Sweep => sweep::run(&s),
        Command::Compare => compare::run(&s),
        Command::Region => region::run(&s),
        Command::Verify => verify::run(&s),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
