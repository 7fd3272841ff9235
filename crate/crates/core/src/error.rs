use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke a dimension or ordering contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid user input (non-finite data, bad configuration, empty ranges).
    #[error("invalid input: {0}")]
    Input(String),

    /// A query fell outside the span covered by a trajectory.
    #[error("time {t} outside trajectory span [{start}, {end}]")]
    Range { t: f64, start: f64, end: f64 },

    /// The right-hand side produced a non-finite value or left its domain.
    #[error("divergence at t = {t}: {reason}")]
    Divergence { t: f64, reason: String },

    /// The step size fell below the stall threshold.
    #[error("step size {dt:e} below minimum at t = {t}")]
    Stall { t: f64, dt: f64 },

    /// Consistent initialization failed.
    #[error("initialization failed: {reason} (best residual {residual:e})")]
    Init { reason: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} contains non-finite values")))
    }
}
