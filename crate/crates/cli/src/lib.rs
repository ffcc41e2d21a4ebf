//! Configuration, run modes and run records behind the `spinbeam` binary.

pub mod commands;
pub mod config;
pub mod record;

pub use commands::{execute, CliError, Outcome};
pub use config::{ConfigError, MethodChoice, Mode, RunConfig};
