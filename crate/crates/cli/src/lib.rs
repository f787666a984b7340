//! Experiment runner for the coupled kicked tops: TOML configs in, CSV artifacts out.

pub mod catalog;
pub mod config;
mod error;
pub mod experiment;
pub mod plot;

pub use config::{validate_config, ExperimentConfig, ExperimentKind, Validated, Violation};
pub use error::CliError;
pub use experiment::{run_experiment, RunOptions, RunReport};
