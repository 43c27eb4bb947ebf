//! Command-line front end: TOML configs in, CSV tables and a run manifest out.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use app::{run, Cli, Command};
pub use error::CliError;
