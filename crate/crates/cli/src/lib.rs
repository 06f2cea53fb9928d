pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod runner;

pub use error::{CliError, CliResult};
