//! Batch front end: TOML run configs, scenario orchestration and artifact
//! output for the `slidebasis` binary.

pub mod config;
mod error;
pub mod run;

pub use config::{Mode, RunConfig};
pub use error::CliError;
pub use run::{run_basis, run_compare, run_rocket, run_simulate, run_topopt, Artifacts, RunSummary};
