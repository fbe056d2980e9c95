//! Command-line pipeline over the `edgehealth` library: generate, train,
//! predict, evaluate, explain and report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

pub use cli::Cli;
pub use commands::{run, UsageError};
