//! Command implementations behind the `cdnes` binary.
//!
//! Everything here returns [`CliError`] holding a process exit code, so the
//! binary shim stays a thin argument parser and integration tests can drive
//! the same code paths in-process.

pub mod commands;
pub mod config;

use std::fmt;

/// Exit code for configuration problems (unreadable file, bad key, value out
/// of range).
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when a simulation left the finite range.
pub const EXIT_DIVERGENCE: i32 = 3;
/// Exit code when no step-size pair satisfies the convergence certificate.
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or environment; exit 2.
    Config(String),
    /// The simulation diverged; exit 3. Partial traces are still written.
    Divergence(String),
    /// Certificate construction failed; exit 4.
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Divergence(_) => EXIT_DIVERGENCE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Divergence(msg) => write!(f, "divergence: {msg}"),
            CliError::Infeasible(msg) => write!(f, "certificate infeasible: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
