//! `metaphor-rsa` command-line entry point.
//!
//! Exit codes: 0 success, 1 domain error (bad input, failed validation,
//! unknown noun, numerical failure), 2 I/O error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, Command, RunConfig};

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate(c) => commands::validate(&RunConfig::resolve(&c)?),
        Command::Interpret { topic, vehicle, common } => {
            commands::interpret_pair(&RunConfig::resolve(&common)?, &topic, &vehicle)
        }
        Command::Train(c) => commands::train(&RunConfig::resolve(&c)?),
        Command::Eval(c) => commands::eval(&RunConfig::resolve(&c)?),
        Command::Ablate { kind, common } => commands::ablate(&RunConfig::resolve(&common)?, kind),
        Command::Corr(c) => commands::corr(&RunConfig::resolve(&c)?),
    }
}

fn is_io(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<std::io::Error>().is_some()
            || e.downcast_ref::<metaphor_rsa::Error>().is_some_and(metaphor_rsa::Error::is_io)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_io(&e) { 2 } else { 1 })
        }
    }
}
