//! Command line and file formats for the `redact-core` mechanisms: chain
//! loading, the fixture catalog, report/CSV emission, and the `redact`
//! binary's subcommands.

pub mod chainfile;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod report;

use std::ffi::OsString;

use clap::Parser;
use clap::error::ErrorKind;

use cli::{Cli, Command};

/// Parse `argv` and run the selected subcommand, returning the process exit
/// status: 0 success, 2 validation failure, 3 failed audit verdict,
/// 1 internal error.
pub fn run_command<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate(args) => commands::run_validate(args),
        Command::Mechanism(args) => commands::run_mechanism(args),
        Command::Audit(args) => commands::run_audit(args),
        Command::Distortion(args) => commands::run_distortion(args),
        Command::Bound(args) => commands::run_bound(args),
        Command::Sweep(args) => commands::run_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
