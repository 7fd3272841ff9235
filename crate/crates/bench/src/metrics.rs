use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Error norms of one state over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateErrors {
    /// `sqrt(Σ_g d²)`, not normalized by the point count.
    pub l2: f64,
    pub linf: f64,
    pub mae: f64,
}

/// Per-state errors of `solution - reference`, both laid out one row per
/// grid time.
pub fn compute_errors(solution: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<Vec<StateErrors>> {
    if solution.shape() != reference.shape() {
        return Err(BenchError::Contract(format!(
            "solution is {:?} but reference is {:?}",
            solution.shape(),
            reference.shape()
        )));
    }
    let points = solution.nrows();
    if points == 0 {
        return Err(BenchError::Contract("empty grid".into()));
    }
    Ok((0..solution.ncols())
        .map(|k| {
            let mut e = StateErrors::default();
            for g in 0..points {
                let d = (solution[(g, k)] - reference[(g, k)]).abs();
                e.l2 += d * d;
                e.linf = e.linf.max(d);
                e.mae += d;
            }
            e.l2 = e.l2.sqrt();
            e.mae /= points as f64;
            e
        })
        .collect())
}

/// Element-wise mean of equally sized error tables.
pub(crate) fn mean_errors(tables: &[Vec<StateErrors>]) -> Vec<StateErrors> {
    let Some(first) = tables.first() else {
        return Vec::new();
    };
    let r = tables.len() as f64;
    (0..first.len())
        .map(|k| StateErrors {
            l2: tables.iter().map(|t| t[k].l2).sum::<f64>() / r,
            linf: tables.iter().map(|t| t[k].linf).sum::<f64>() / r,
            mae: tables.iter().map(|t| t[k].mae).sum::<f64>() / r,
        })
        .collect()
}
