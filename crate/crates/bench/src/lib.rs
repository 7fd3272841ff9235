//! Experiment harness for the pirpnn solver: reference trajectories, error
//! tables, seed-averaged benchmark runs, the (c, N) bias-variance sweep and
//! result export.

pub mod error;
pub mod export;
pub mod metrics;
pub mod reference;
pub mod run;
pub mod sweep;

pub use error::{BenchError, Result};
pub use metrics::{compute_errors, StateErrors};
pub use reference::ReferenceTrajectory;
pub use run::{run_benchmark, BenchmarkRun, solve_benchmark, ErrorReport, Failure, RunOptions, Timing};
pub use sweep::{linspace, sweep_cn, SweepCell, SweepConfig, SweepResult};
