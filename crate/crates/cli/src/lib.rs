//! Configuration, sweeps and Monte Carlo validation behind the
//! `relay-outage` binary.

pub mod config;
pub mod error;
pub mod run;

pub use config::{Config, SweepMethod, SweepSpec, Variable};
pub use error::CliError;
pub use run::{run_sweep, sweep_rows, validate, Report, RunOptions};
