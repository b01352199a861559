//! `solwave`: solitary-wave profiles, Melnikov scans and roots, reduced-flow
//! simulations and a self-check suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod output;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{RootArgs, ScanArgs, SimulateArgs, WaveArgs};
use error::EXIT_INVALID_ARGS;
use verify::VerifyArgs;

#[derive(Debug, Parser)]
#[command(
    name = "solwave",
    version,
    about = "Solitary waves of the delayed RLW equation under KS and ME perturbations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form solitary wave profile and homoclinic loop
    Wave(WaveArgs),
    /// M*, M and dM*/dc over a grid of speeds
    MelnikovScan(ScanArgs),
    /// Wave speed at which M* vanishes
    MelnikovRoot(RootArgs),
    /// Integrate the reduced flow near the Melnikov root
    Simulate(SimulateArgs),
    /// Run the built-in consistency checks
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID_ARGS),
            };
        }
    };
    let outcome = match &cli.command {
        Command::Wave(a) => commands::wave(a),
        Command::MelnikovScan(a) => commands::melnikov_scan(a),
        Command::MelnikovRoot(a) => commands::melnikov_root(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => verify::verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
