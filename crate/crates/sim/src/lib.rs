//! Experiment runner for the DS-CDMA power-control game in `powergame-core`.
//!
//! - [`spec`]: experiment parameters and their defaults;
//! - [`sweep`]: load and q sweeps averaged over seeded realizations;
//! - [`trace`]: per-iteration record of one dynamics run;
//! - [`output`]: CSV tables and plot data;
//! - [`io`]: JSON files for scenarios, code books and realizations;
//! - [`config`]: TOML configuration and precedence rules.

pub mod config;
mod error;
pub mod io;
pub mod output;
pub mod spec;
pub mod sweep;
pub mod trace;

pub use config::{FileConfig, Settings, OUT_DIR_ENV};
pub use error::{Error, Result};
pub use spec::{ExperimentSpec, TraceSpec};
pub use sweep::{q_ratios, run_load_sweep, run_q_sweep, QSweepRow, RunRecord, SweepResult, SweepRow};
pub use trace::{run_convergence_trace, run_convergence_trace_on, Trace, TraceRow};
