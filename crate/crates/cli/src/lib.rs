//! Library side of the `asc` binary: configuration, file formats and the
//! four subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use error::{CliError, ErrorKind};
