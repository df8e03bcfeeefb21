//! Command-line front end for variable selection by partitioning penalized
//! solution paths.
//!
//! The binary exposes five subcommands — `paths`, `select`, `simulate`,
//! `sweep-r` and `screen` — each writing a fixed set of files into the
//! directory given by `--output`, together with a `manifest.json` that
//! records the fully resolved configuration.  Replaying a manifest with
//! `--from-manifest` reproduces every output byte for byte.
//!
//! Exit codes: 0 success, 2 input or configuration problem, 3 numeric
//! failure, 4 I/O failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod input;

pub use args::{dispatch, init_threads, Cli};
pub use error::{CliError, CliResult};
