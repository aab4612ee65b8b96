//! `mlrabi` command-line driver: flag and config parsing, dispatch to
//! [`multilevel_rabi`], and CSV/JSON output.

pub mod args;
pub mod config;
pub mod coupling;
pub mod execute;
pub mod output;

use std::ffi::OsString;

pub use config::{parse_config, ConfigError, Job, RunConfig};
pub use execute::{execute, run_job, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO, EXIT_OK, EXIT_PRECISION};

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // help and version requests are not errors
    if let Err(e) = <args::Cli as clap::Parser>::try_parse_from(&argv) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            print!("{}", e.render());
            return EXIT_OK;
        }
    }
    match parse_config(argv, None) {
        Ok(config) => execute(&config),
        Err(ConfigError::Usage(msg)) => {
            eprint!("{msg}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("mlrabi: config error: {e}");
            match e {
                ConfigError::Io { .. } => EXIT_IO,
                _ => EXIT_CONFIG,
            }
        }
    }
}
