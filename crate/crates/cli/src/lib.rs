//! `tabanon` command-line front end.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when no lattice node
//! satisfies the constraints or a study plan fails validation.

pub mod args;
pub mod artifacts;
pub mod commands;
pub mod inputs;

use std::ffi::OsString;

use clap::Parser;
use tabanon_core::Error;

use crate::args::{Cli, Command};

pub const EXIT_INPUT_ERROR: i32 = 1;

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INPUT_ERROR
            } else {
                commands::EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Anonymize(a) => commands::anonymize(a),
        Command::Assess(a) => commands::assess(a),
        Command::ValidatePlan(a) => commands::validate_plan(a),
        Command::Explain(a) => commands::explain(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::NoSolution { .. }) => commands::EXIT_REJECTED,
                _ => EXIT_INPUT_ERROR,
            }
        }
    }
}
