//! Physics-informed random projection networks for stiff ODE and index-1
//! DAE initial value problems in linear-implicit form `M u' = f(t, u)`.

pub mod basis;
pub mod dae_init;
pub mod error;
pub mod linalg;
pub mod problems;
pub mod residual;
pub mod stepper;
pub mod trial;

pub use error::{Error, Result};
pub use residual::{IvpSystem, MassMatrix, Rhs};
pub use stepper::{solve, SolveStats, SolverConfig};
pub use trial::{TrialSolution, Trajectory};
