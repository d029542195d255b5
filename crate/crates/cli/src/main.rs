//! `ecm`: run embedded cell method experiments and write CSV/JSON artifacts.
//!
//! Exit status is 0 on success, 1 on any error (including usage errors) and
//! 2 when an iteration stopped at its cap without converging.

mod config;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use ecm_core::EcmError;

use config::{parse_config, Cli};
use run::{run_experiment, Outcome};

const EXIT_ERROR: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_ERROR),
            };
        }
    };
    let config = match parse_config(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run_experiment(&config) {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("warning: iteration stopped at max_iter before reaching tol");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<EcmError>() {
                Some(EcmError::SolverNotConverged { .. }) => ExitCode::from(EXIT_NOT_CONVERGED),
                _ => ExitCode::from(EXIT_ERROR),
            }
        }
    }
}
