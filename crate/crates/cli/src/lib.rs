//! Library side of the `driftmem` command-line tool.

pub mod commands;
pub mod config;
pub mod stats;

pub use commands::{compare, generate, run, CompareOutcome, RunOutcome, THREADS_ENV};
pub use config::{ExperimentConfig, FlatConfig, ModelKind};
