//! Command-line front end. Exit codes: 0 success or pass, 1 validation
//! failure, 2 usage error, 3 numerical error.

use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod manifest;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("meander-sojourn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
