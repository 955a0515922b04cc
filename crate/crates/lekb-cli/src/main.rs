//! `lekb` — build, benchmark and score legal-entity knowledge bases from
//! noisy role-tagged records.
//!
//! All commands are deterministic given their flags and input files. Exit
//! codes: 0 success, 2 validation error, 1 internal error; every failure
//! writes one machine-parsable JSON line to standard error.

use clap::Parser;

use lekb_cli::args::{Cli, Command};
use lekb_cli::commands;

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => commands::build(args),
        Command::Synth(args) => commands::synth(args),
        Command::Eval(args) => commands::eval(args),
        Command::Sim(args) => commands::sim(args),
    };
    if let Err(error) = result {
        eprintln!("{}", error.to_stderr_line());
        std::process::exit(error.exit_code());
    }
}
