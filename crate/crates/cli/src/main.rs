mod args;
mod bench;
mod experiment;
mod input;
mod run;

use std::process::ExitCode;

use clap::Parser;
use lowrank::Error;

use crate::args::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::Stream { .. } => 3,
        Error::NonFinite(..) => 4,
        e if e.is_numerical() => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Svd(a) => run::cmd_svd(a),
        Command::Eig(a) => run::cmd_eig(a),
        Command::Id(a) => run::cmd_id(a),
        Command::Range(a) => run::cmd_range(a),
        Command::Experiment(a) => experiment::cmd_experiment(a),
        Command::Bench(a) => bench::cmd_bench(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
