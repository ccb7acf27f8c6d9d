//! Command-line front end: model ingestion, bound sweeps, membership queries, exact XY
//! tables and relation probes, written as reproducible CSV or JSON.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<redset::Error> for CliError {
    fn from(e: redset::Error) -> Self {
        use redset::Error as E;
        match e {
            E::NoConvergence { .. } | E::DegenerateTransfer(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 3,
            CliError::Invariant(_) | CliError::Numerical(_) => 4,
        }
    }
}

/// Caps the global worker pool at `REDSET_THREADS` when set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("REDSET_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("REDSET_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Membership(a) => commands::membership_cmd(a),
        Command::Xy(a) => commands::xy(a),
        Command::OdeCheck(a) => commands::ode_check(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Probe(a) => commands::probe(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("redset: {e}");
            e.exit_code()
        }
    }
}
