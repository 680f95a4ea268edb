//! Batch front end: configuration loading and the simulate, optimize, mcmc
//! and benchmark pipelines behind the `ihtc` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_benchmark, cmd_mcmc, cmd_optimize, cmd_simulate, with_pool};
pub use config::ToolConfig;
pub use error::CliError;
