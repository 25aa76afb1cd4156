//! `primewalk` command-line driver.
//!
//! Exit status: 0 on success, 1 on runtime or I/O failure, 2 on usage or
//! precondition errors (including unreadable checkpoints and CSV schema
//! mismatches).

mod args;
mod io;
mod run;
mod stats;

use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};
use serde_json::{Map, Value};

use args::{Cli, Command};
use io::CliError;

const RUN_OPTIONS: [&str; 8] = ["mode", "limit", "cadence", "seed", "checkpoint", "out", "count_mode", "interval"];

fn source_of(m: &ArgMatches, id: &str) -> Value {
    let s = match m.value_source(id) {
        Some(ValueSource::CommandLine) => "flag",
        Some(ValueSource::EnvVariable) => "env",
        Some(ValueSource::DefaultValue) => "default",
        _ => "unset",
    };
    Value::from(s)
}

fn dispatch(cli: &Cli, matches: &ArgMatches) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => {
            let sub = matches.subcommand_matches("run").expect("run subcommand");
            let mut sources = Map::new();
            for id in RUN_OPTIONS {
                sources.insert(id.to_string(), source_of(sub, id));
            }
            // Global options are visible from the subcommand's matches.
            sources.insert("segment_size".into(), source_of(sub, "segment_size"));
            run::run(a, cli.segment_size, sources)
        }
        Command::Stats(s) => stats::stats(s, cli.segment_size),
        Command::ExportRaster(a) => stats::export_raster(a),
        Command::Inspect { checkpoint } => {
            let w = io::load_checkpoint(checkpoint)?;
            let mut text =
                serde_json::to_string_pretty(&run::inspect(&w)).map_err(|e| CliError::Runtime(e.to_string()))?;
            text.push('\n');
            io::emit(None, text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match dispatch(&cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("primewalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
