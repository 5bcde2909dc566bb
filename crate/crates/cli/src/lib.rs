//! Command-line surface of the VES market-penetration model.
//!
//! The binary is a thin wrapper: [`config::RunConfig::resolve`] merges the
//! JSON config and flags, [`commands::run`] computes the outputs, and
//! [`commands::Outcome::write`] emits them.

pub mod commands;
pub mod config;
mod error;
pub mod svg;

pub use commands::{run, Outcome};
pub use config::{Cli, Command, Format, RunConfig};
pub use error::{CliError, Result};

/// Parses `args`, runs the command and writes its outputs. Returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;

    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = RunConfig::resolve(cli.command, cli.overrides)
        .and_then(|cfg| run(&cfg))
        .and_then(|outcome| outcome.write());
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
