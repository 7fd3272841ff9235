//! Consistent initial values for index-1 DAEs: Newton on the algebraic rows
//! with respect to the algebraic variables, differential values held fixed.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, Error, Result};
use crate::residual::IvpSystem;

#[derive(Debug, Clone)]
pub struct ConsistencyProblem {
    sys: IvpSystem,
    t0: f64,
    /// Full state: given differential values plus guesses for the algebraic ones.
    u0: Vec<f64>,
    alg_vars: Vec<usize>,
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl ConsistencyProblem {
    /// Algebraic variables default to the indices of the algebraic rows.
    pub fn new(sys: IvpSystem, t0: f64, u0: Vec<f64>) -> Self {
        let alg_vars = sys.algebraic_rows().to_vec();
        Self {
            sys,
            t0,
            u0,
            alg_vars,
            tol: 1e-16,
            max_iterations: 100,
            max_halvings: 30,
        }
    }

    pub fn with_algebraic_vars(mut self, vars: Vec<usize>) -> Self {
        self.alg_vars = vars;
        self
    }

    pub fn algebraic_vars(&self) -> &[usize] {
        &self.alg_vars
    }

    pub fn system(&self) -> &IvpSystem {
        &self.sys
    }

    /// Convergence threshold actually used, floored at 4ε.
    pub fn effective_tol(&self) -> f64 {
        self.tol.max(4.0 * f64::EPSILON)
    }
}

/// `f_i(t, u)` for the algebraic rows i.
pub fn constraint_residual(sys: &IvpSystem, t: f64, u: &[f64]) -> Vec<f64> {
    let f = sys.f(t, u);
    sys.algebraic_rows().iter().map(|&i| f[i]).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Solves the constraint rows for the algebraic variables. Returns their
/// values in the order of [`ConsistencyProblem::algebraic_vars`].
pub fn make_consistent(cp: &ConsistencyProblem) -> Result<Vec<f64>> {
    let sys = &cp.sys;
    let m = sys.dim();
    let rows = sys.algebraic_rows();
    let vars = &cp.alg_vars;
    if cp.u0.len() != m {
        return Err(Error::Contract(format!("state has length {}, expected {m}", cp.u0.len())));
    }
    if vars.len() != rows.len() || vars.iter().any(|&k| k >= m) {
        return Err(Error::Contract(format!(
            "{} algebraic rows but {} algebraic variables",
            rows.len(),
            vars.len()
        )));
    }
    ensure_finite(&cp.u0, "initial state")?;
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let tol = cp.effective_tol();
    let mut u = cp.u0.clone();
    let mut g = constraint_residual(sys, cp.t0, &u);
    let mut gn = inf_norm(&g);
    if !gn.is_finite() {
        return Err(Error::Init {
            reason: "constraint is not finite at the initial guess".into(),
            residual: gn,
        });
    }
    let p = rows.len();
    for _ in 0..cp.max_iterations {
        let vnorm = inf_norm(&vars.iter().map(|&k| u[k]).collect::<Vec<_>>());
        let scale = tol * (1.0 + vnorm);
        if gn <= scale {
            return Ok(vars.iter().map(|&k| u[k]).collect());
        }
        let jf = sys.jac_f(cp.t0, &u).map_err(|e| Error::Init {
            reason: e.to_string(),
            residual: gn,
        })?;
        let jg = DMatrix::from_fn(p, p, |a, b| jf[(rows[a], vars[b])]);
        let lu = jg.lu();
        let Some(step) = lu.solve(&DVector::from_column_slice(&g)) else {
            return Err(Error::Init {
                reason: "constraint Jacobian is singular".into(),
                residual: gn,
            });
        };
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::Init {
                reason: "constraint Jacobian is singular".into(),
                residual: gn,
            });
        }

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=cp.max_halvings {
            let mut trial = u.clone();
            for (b, &k) in vars.iter().enumerate() {
                trial[k] = u[k] - lambda * step[b];
            }
            let gt = constraint_residual(sys, cp.t0, &trial);
            let gtn = inf_norm(&gt);
            if gtn.is_finite() && gtn < gn {
                accepted = Some((trial, gt, gtn));
                break;
            }
            lambda *= 0.5;
        }
        let step_norm = inf_norm(step.as_slice());
        match accepted {
            Some((trial, gt, gtn)) => {
                u = trial;
                g = gt;
                gn = gtn;
            }
            None => {
                // no decrease left: at rounding level this is convergence
                if step_norm <= scale {
                    return Ok(vars.iter().map(|&k| u[k]).collect());
                }
                return Err(Error::Init {
                    reason: "line search found no decrease".into(),
                    residual: gn,
                });
            }
        }
        if lambda == 1.0 && step_norm <= scale {
            return Ok(vars.iter().map(|&k| u[k]).collect());
        }
    }
    Err(Error::Init {
        reason: format!("no convergence in {} iterations", cp.max_iterations),
        residual: gn,
    })
}

/// Full state with the algebraic components replaced by consistent values.
pub fn consistent_state(sys: &IvpSystem, t0: f64, u0: &[f64]) -> Result<Vec<f64>> {
    let cp = ConsistencyProblem::new(sys.clone(), t0, u0.to_vec());
    let v = make_consistent(&cp)?;
    let mut u = u0.to_vec();
    for (&k, vk) in cp.algebraic_vars().iter().zip(v) {
        u[k] = vk;
    }
    Ok(u)
}
