//! Command-line front end: CSV ingestion, fitting with bootstrap inference,
//! simulation campaigns and prediction-error comparisons.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod output;
pub mod report;

use args::{Cli, Command};
use error::CliError;

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a).map(|_| ()),
        Command::Simulate(a) => commands::cmd_simulate(a).map(|_| ()),
        Command::Pe(a) => commands::cmd_pe(a).map(|_| ()),
    }
}
