//! Command line driver: configuration parsing and benchmark runs.

pub mod config;
pub mod run;

pub use config::{parse_args, parse_config, RunConfig, UsageError};
pub use run::{run_benchmark, run_sweep, RunSummary};
