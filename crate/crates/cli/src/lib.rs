//! Command-line driver for `strainwave-core`: scenario files, CSV output,
//! convergence studies, parameter sweeps and material calibration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::ScenarioConfig;
pub use error::{CliError, Result};
