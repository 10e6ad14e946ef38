//! Command-line front end: configuration, CSV input and output, and dispatch
//! to the samplers and simulation experiments.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;

use std::ffi::OsString;

use clap::Parser;

pub use commands::run;
pub use config::{Args, Command, Experiment, RunConfig, SmoothSpec};
pub use error::{CliError, CliResult};

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match args.with_config_file().and_then(RunConfig::resolve).and_then(|cfg| run(&cfg)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
