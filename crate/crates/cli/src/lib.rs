//! Reproducible experiments on the TCP window-size process and its
//! relatives, with CSV, JSON and SVG artifacts.

// `!(a > b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;
mod svg;

use pdmp_core::{Error, Result};

pub use config::{Experiment, ExperimentConfig, Format, Grid};
pub use report::{Check, Report, Table};

/// Runs one experiment; artifacts are written separately by [`Report::write`].
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    experiments::run(config)
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::ScheduleInfeasible(_) => EXIT_USAGE,
        Error::Numerical(_) => EXIT_NUMERICAL,
    }
}
