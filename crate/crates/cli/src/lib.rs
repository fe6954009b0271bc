//! Configuration-driven driver for the fractional MGT solvers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::CliError;
