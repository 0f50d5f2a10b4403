//! Config parsing and experiment orchestration behind the `qhs` binary.

pub mod config;
pub mod error;
pub mod runner;

pub use config::{parse_config, ElementSpec, ExperimentConfig, ExperimentKind, TransversalChoice, TransversalSpec};
pub use error::CliError;
pub use runner::{run_experiment, ExperimentReport, ReportBody};
