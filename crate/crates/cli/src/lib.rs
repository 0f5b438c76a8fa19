//! Batch front end for the pursuit engine: config files, built-in presets,
//! property checks, capture-time sweeps, and round detection on stored traces.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

pub use error::{CliError, Status};
