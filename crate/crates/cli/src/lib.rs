//! Experiment harness for `qpt-core`: configuration, instance generation,
//! seeded trial execution and CSV/JSON output.

pub mod app;
pub mod config;
pub mod error;
pub mod instance;
pub mod output;
pub mod poly;
pub mod run;
pub mod selftest;
pub mod sweep;

pub use config::{load_config, ExperimentConfig, Overrides, TesterKind};
pub use error::{CliError, CliResult};
pub use run::{run, RunOutput};
