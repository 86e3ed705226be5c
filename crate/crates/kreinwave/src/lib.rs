//! Command line runner for `kreinwave-core`: scenario files in, CSV and
//! binary artifacts plus a pass/fail summary out.

pub mod cli;
pub mod config;
pub mod output;
pub mod scenario;

use kreinwave_core::KreinError;

/// A scenario that cannot be run as written. Maps to exit status 2.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

impl From<KreinError> for ConfigError {
    fn from(e: KreinError) -> Self {
        ConfigError(e.to_string())
    }
}

/// Anything that stops a scenario after its directory exists.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] KreinError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// The scenarios run by `kreinwave run` without arguments.
pub const DEFAULT_SUITE: &[(&str, &str)] = &[
    ("verify-matrix", include_str!("../scenarios/verify-matrix.toml")),
    ("stargraph-run", include_str!("../scenarios/stargraph-run.toml")),
    ("pointwave-run", include_str!("../scenarios/pointwave-run.toml")),
    ("drift-gamma", include_str!("../scenarios/drift-gamma.toml")),
    ("drift-smoke", include_str!("../scenarios/drift-smoke.toml")),
];
