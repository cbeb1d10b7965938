//! Experiment harness around `wpl-core`: configuration layering, command
//! execution and deterministic artifact emission.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Command, RunConfig};
pub use error::CliError;
