//! Experiment driver for the fixed-point optimization benchmarks.
//!
//! The binary parses a flat JSON run configuration, executes an algorithm
//! grid over seeded problem samplings, and emits per-iteration CSV,
//! aggregated measures, an optional SVG convergence plot, and optional
//! convergence-bound diagnostics. Everything is deterministic under the
//! master seed.

pub mod bounds;
pub mod config;
pub mod emit;
pub mod presets;
pub mod runner;

use thiserror::Error;

/// Process-level failure classes, each with a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical integrity failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for I/O, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}
