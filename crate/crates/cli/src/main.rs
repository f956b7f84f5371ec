//! `bergman-lab`: run verification suites, distance experiments, norm tables
//! and Whitney decompositions, writing JSON and CSV reports.
//!
//! Exit status: 0 pass, 1 fail, 2 inconclusive, 64 usage.

mod config;
mod distance;
mod norms;
mod report;
mod verify;
mod whitney;

use bergman_core::{par, Error};
use clap::Parser;
use config::{Cli, Command, RunConfig, UsageError, SCHEMA};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

const EXIT_FAIL: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Precondition { .. } | Error::InvalidParameter(_) | Error::Domain(_)) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn run() -> anyhow::Result<Outcome> {
    let args = config::expand_args(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            return Err(UsageError(text.trim_start_matches("error: ").trim_end().to_string()).into());
        }
        Err(e) => {
            // --help and --version
            print!("{e}");
            return Ok(Outcome::Pass);
        }
    };
    let threads = config::threads_from_env()?;
    if let Some(t) = threads {
        par::set_threads(t);
    }
    let rc = RunConfig {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        config_file: cli.config.clone(),
        threads,
        parallel: par::is_parallel(),
        command: cli.command.clone(),
    };
    match &cli.command {
        Command::Verify(a) => verify::run(a, &rc),
        Command::Distance(a) => distance::run(a, &rc),
        Command::Norms(a) => norms::run(a, &rc),
        Command::Whitney(a) => whitney::run(a, &rc),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(EXIT_FAIL),
        Ok(Outcome::Inconclusive) => ExitCode::from(EXIT_INCONCLUSIVE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
