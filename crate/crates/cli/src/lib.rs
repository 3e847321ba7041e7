//! Command-line driver for the Monge–Ampère plate library: configuration,
//! growth presets and the per-command pipelines.

pub mod commands;
pub mod config;
pub mod presets;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{execute, Outcome};
pub use config::{Command, Overrides, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ma_plate_core::Error),

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(ma_plate_core::Error::NoConvergence { .. }) => EXIT_NOT_CONVERGED,
            _ => EXIT_INVALID,
        }
    }
}

/// Resolve the configuration, run the command and map the result to an
/// exit status.
pub fn run(command: Command, overrides: &Overrides) -> (i32, Result<Outcome, CliError>) {
    let res = RunConfig::resolve(command, overrides).and_then(|cfg| execute(&cfg));
    let code = match &res {
        Ok(o) if o.converged => EXIT_OK,
        Ok(_) => EXIT_NOT_CONVERGED,
        Err(e) => e.exit_code(),
    };
    (code, res)
}

/// Cap rayon's global pool from `MA_PLATE_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(val) = std::env::var("MA_PLATE_THREADS") else {
        return Ok(());
    };
    let n: usize = val
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("MA_PLATE_THREADS must be a positive integer, got '{val}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}
