//! Command-line front end for the `css_lab` simulator: scenario files in,
//! CSV tables, plot scripts and a JSON manifest out.

pub mod commands;
pub mod error;
pub mod format;
pub mod scenario_file;

pub use commands::{run_command, RunManifest, Subcommand};
pub use error::CliError;
pub use scenario_file::{parse_scenario, scenario_digest};
