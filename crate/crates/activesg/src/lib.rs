//! File formats, the experiment runner and command implementations for `activesg-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod runner;
pub mod scene;
pub mod snapshot;
pub mod tables;

pub use error::{CliError, FileError};
