//! Command-line harness: analytic tables, Monte Carlo runs, Bell tests,
//! model comparisons and figure data.

pub mod commands;
pub mod output;
pub mod report;
pub mod spec;

use std::path::{Path, PathBuf};

pub use commands::{
    execute, run_analytic, run_bell, run_compare, run_figures, run_simulate, Outcome,
};
pub use report::SecurityReport;
pub use spec::{parse_run_spec, Command, OutputFormat, ParseOutcome, RunSpec};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Protocol(#[from] hyperqkd::protocol::ProtocolError),
    #[error(transparent)]
    Analytics(#[from] hyperqkd::analytics::AnalyticsError),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let spec = match parse_run_spec(argv) {
        Ok(ParseOutcome::Run(spec)) => spec,
        Ok(ParseOutcome::Info(text)) => {
            print!("{text}");
            return 0;
        }
        Err(msg) => {
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            return EXIT_USAGE;
        }
    };
    match execute(&spec) {
        Ok(outcome) => {
            for path in &outcome.written {
                eprintln!("wrote {}", path.display());
            }
            if outcome.failures > 0 {
                eprintln!(
                    "{} comparison(s) beyond 5 standard errors",
                    outcome.failures
                );
                if spec.strict {
                    return EXIT_FAILURE;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
