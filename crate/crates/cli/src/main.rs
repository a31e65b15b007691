mod apply;
mod args;
mod bench;
mod error;
mod evolve;
mod init_pop;
mod score;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "caedge",
    about = "Evolve cellular-automaton rule tables that map a binary image to its edges",
    version,
    propagate_version = true
)]
struct Options {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic algorithm on a start/goal image pair
    Evolve(args::Evolve),
    /// Apply a stored rule table to an image
    Apply(args::Apply),
    /// Hamming distance between two images
    Score(args::Score),
    /// Write a fresh random population file
    InitPop(args::InitPop),
    /// Time full generations at a given image size
    Bench(args::Bench),
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Evolve(a) => evolve::cmd(a),
        Command::Apply(a) => apply::cmd(a),
        Command::Score(a) => score::cmd(a),
        Command::InitPop(a) => init_pop::cmd(a),
        Command::Bench(a) => bench::cmd(a),
    }
}

fn main() -> ExitCode {
    let options = match Options::try_parse() {
        Ok(o) => o,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(error::EXIT_USAGE);
        }
    };
    match dispatch(&options.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("caedge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
