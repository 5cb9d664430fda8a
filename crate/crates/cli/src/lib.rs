//! Command-line front end for `loracap-core`: scenario files, sweeps over
//! the number of devices, CSV output and engine comparison.

pub mod app;
pub mod config;
pub mod error;
pub mod parallel;
pub mod report;
pub mod sweep;

pub use error::{CliError, Result};
pub use report::{compare_report, Report};
pub use sweep::{run_sweep, Engine, SweepRow, SweepSpec, DEFAULT_N_VALUES};
