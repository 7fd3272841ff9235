//! Linear-implicit systems `M u' = f(t, u)`, collocation grids and the
//! residual/Jacobian assembly for one subinterval.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::SparseMatrix;
use crate::trial::TrialSolution;

/// Right-hand side `f(t, u)` of a linear-implicit system.
pub trait Rhs: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]);

    /// Writes `∂f/∂u` into `jac` (already zeroed, `dim × dim`). Returns
    /// `false` when no analytic Jacobian is available, in which case a
    /// finite-difference approximation is used.
    fn jacobian(&self, _t: f64, _u: &[f64], _jac: &mut DMatrix<f64>) -> bool {
        false
    }

    /// Structurally nonzero `(i, k)` entries of `∂f/∂u`, if known.
    fn sparsity(&self) -> Option<Vec<(usize, usize)>> {
        None
    }

    /// Domain check on an iterate; `abstol` is the solver's absolute
    /// tolerance.
    fn admissible(&self, _u: &[f64], _abstol: f64) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MassMatrix {
    Identity,
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl MassMatrix {
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        match self {
            MassMatrix::Identity => {
                if i == k {
                    1.0
                } else {
                    0.0
                }
            }
            MassMatrix::Diagonal(d) => {
                if i == k {
                    d[i]
                } else {
                    0.0
                }
            }
            MassMatrix::Dense(a) => a[(i, k)],
        }
    }

    /// `(M v)_i`.
    pub fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        match self {
            MassMatrix::Identity => v[i],
            MassMatrix::Diagonal(d) => d[i] * v[i],
            MassMatrix::Dense(a) => (0..v.len()).map(|k| a[(i, k)] * v[k]).sum(),
        }
    }
}

/// A linear-implicit initial value system.
#[derive(Clone)]
pub struct IvpSystem {
    rhs: Arc<dyn Rhs>,
    mass: MassMatrix,
    algebraic: Vec<usize>,
    /// For each state k, the sorted rows i whose block (i, k) may be nonzero.
    col_pattern: Vec<Vec<usize>>,
    sparse_declared: bool,
    domain_tol: f64,
}

impl fmt::Debug for IvpSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvpSystem")
            .field("dim", &self.dim())
            .field("mass", &self.mass)
            .field("algebraic", &self.algebraic)
            .finish()
    }
}

impl IvpSystem {
    pub fn new(rhs: Arc<dyn Rhs>, mass: MassMatrix) -> Result<Self> {
        let m = rhs.dim();
        if m == 0 {
            return Err(Error::Input("system has no states".into()));
        }
        match &mass {
            MassMatrix::Identity => {}
            MassMatrix::Diagonal(d) => {
                if d.len() != m {
                    return Err(Error::Contract(format!("mass diagonal has {} entries, expected {m}", d.len())));
                }
                ensure_finite(d, "mass matrix")?;
            }
            MassMatrix::Dense(a) => {
                if a.shape() != (m, m) {
                    return Err(Error::Contract(format!("mass matrix is {:?}, expected {m}x{m}", a.shape())));
                }
                ensure_finite(a.as_slice(), "mass matrix")?;
            }
        }
        let algebraic = (0..m).filter(|&i| (0..m).all(|k| mass.entry(i, k) == 0.0)).collect();

        let sparsity = rhs.sparsity();
        let sparse_declared = sparsity.is_some();
        let mut present = vec![vec![false; m]; m];
        match sparsity {
            Some(entries) => {
                for (i, k) in entries {
                    if i >= m || k >= m {
                        return Err(Error::Contract(format!("sparsity entry ({i}, {k}) out of range")));
                    }
                    present[k][i] = true;
                }
                for (k, col) in present.iter_mut().enumerate() {
                    for (i, p) in col.iter_mut().enumerate() {
                        if mass.entry(i, k) != 0.0 {
                            *p = true;
                        }
                    }
                }
            }
            None => present.iter_mut().for_each(|c| c.iter_mut().for_each(|p| *p = true)),
        }
        let col_pattern = present
            .into_iter()
            .map(|c| c.into_iter().enumerate().filter(|e| e.1).map(|e| e.0).collect())
            .collect();
        Ok(Self {
            rhs,
            mass,
            algebraic,
            col_pattern,
            sparse_declared,
            domain_tol: 0.0,
        })
    }

    pub fn ode(rhs: Arc<dyn Rhs>) -> Result<Self> {
        Self::new(rhs, MassMatrix::Identity)
    }

    pub fn dim(&self) -> usize {
        self.rhs.dim()
    }

    pub fn mass(&self) -> &MassMatrix {
        &self.mass
    }

    pub fn rhs(&self) -> &Arc<dyn Rhs> {
        &self.rhs
    }

    /// Rows of the mass matrix that are identically zero.
    pub fn algebraic_rows(&self) -> &[usize] {
        &self.algebraic
    }

    pub fn differential_rows(&self) -> Vec<usize> {
        (0..self.dim()).filter(|i| !self.algebraic.contains(i)).collect()
    }

    pub fn is_dae(&self) -> bool {
        !self.algebraic.is_empty()
    }

    pub fn sparse_declared(&self) -> bool {
        self.sparse_declared
    }

    /// Block pattern: for state k, the rows i with a possibly nonzero block.
    pub fn column_pattern(&self) -> &[Vec<usize>] {
        &self.col_pattern
    }

    /// Copy of the system whose domain check uses `tol`.
    pub fn with_domain_tolerance(&self, tol: f64) -> Self {
        let mut s = self.clone();
        s.domain_tol = tol;
        s
    }

    pub fn f(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.rhs.eval(t, u, &mut out);
        out
    }

    pub fn admissible(&self, u: &[f64]) -> bool {
        self.rhs.admissible(u, self.domain_tol)
    }

    /// Analytic Jacobian when provided, forward differences otherwise.
    pub fn jac_f(&self, t: f64, u: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.dim();
        let mut j = DMatrix::zeros(m, m);
        if self.rhs.jacobian(t, u, &mut j) {
            Ok(j)
        } else {
            fd_jacobian_f(self, t, u, None)
        }
    }
}

/// Forward-difference approximation of `∂f/∂u`. The default step for
/// column k is `sqrt(ε) (1 + |u_k|)`.
pub fn fd_jacobian_f(sys: &IvpSystem, t: f64, u: &[f64], h: Option<f64>) -> Result<DMatrix<f64>> {
    let m = sys.dim();
    if u.len() != m {
        return Err(Error::Contract(format!("state has length {}, expected {m}", u.len())));
    }
    if let Some(h) = h {
        if !(h > 0.0) {
            return Err(Error::Input(format!("difference step must be positive, got {h}")));
        }
    }
    let f0 = sys.f(t, u);
    if f0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            t,
            reason: "non-finite right-hand side".into(),
        });
    }
    let mut jac = DMatrix::zeros(m, m);
    let mut up = u.to_vec();
    let mut fk = vec![0.0; m];
    for k in 0..m {
        let step = h.unwrap_or(f64::EPSILON.sqrt() * (1.0 + u[k].abs()));
        up[k] = u[k] + step;
        let dk = up[k] - u[k];
        sys.rhs.eval(t, &up, &mut fk);
        up[k] = u[k];
        for i in 0..m {
            let d = (fk[i] - f0[i]) / dk;
            if !d.is_finite() {
                return Err(Error::Divergence {
                    t,
                    reason: "non-finite right-hand side".into(),
                });
            }
            jac[(i, k)] = d;
        }
    }
    Ok(jac)
}

/// Collocation points `t_l = t_start + l Δt / n`, `l = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    points: Vec<f64>,
}

impl CollocationGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn make_grid(t_start: f64, t_end: f64, n: usize) -> Result<CollocationGrid> {
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 collocation points, got {n}")));
    }
    let dt = t_end - t_start;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Input(format!("interval [{t_start}, {t_end}] is empty")));
    }
    let mut points: Vec<f64> = (1..=n).map(|l| t_start + l as f64 * dt / n as f64).collect();
    points[n - 1] = t_end;
    for l in 1..n {
        if !(points[l] > points[l - 1]) {
            return Err(Error::Input(format!(
                "interval [{t_start}, {t_end}] too short for {n} distinct points"
            )));
        }
    }
    if !(points[0] > t_start) {
        return Err(Error::Input(format!("interval [{t_start}, {t_end}] too short")));
    }
    Ok(CollocationGrid { points })
}

/// Kernel tables of one basis on one grid, independent of the weights.
#[derive(Debug, Clone)]
pub struct Collocation {
    n: usize,
    m: usize,
    kernels: usize,
    points: Vec<f64>,
    /// `(t_l - t0) φ_kj(t_l)` at `[(l m + k) N + j]`.
    dw: Vec<f64>,
    /// `φ_kj(t_l) + (t_l - t0) φ'_kj(t_l)`, same layout.
    dtdw: Vec<f64>,
}

/// Trial values at the collocation points, `[l m + i]` layout.
#[derive(Debug, Clone)]
pub struct CollocationState {
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
}

impl Collocation {
    pub fn new(ts: &TrialSolution, grid: &CollocationGrid) -> Self {
        let basis = ts.basis();
        let (m, nk, n) = (basis.states(), basis.kernels(), grid.len());
        let t0 = ts.t0();
        let mut dw = vec![0.0; n * m * nk];
        let mut dtdw = vec![0.0; n * m * nk];
        let mut phi = vec![0.0; nk];
        let mut dphi = vec![0.0; nk];
        for (l, &t) in grid.points().iter().enumerate() {
            let tau = t - t0;
            for k in 0..m {
                basis.kernels_and_slopes_into(k, t, &mut phi, &mut dphi);
                let o = (l * m + k) * nk;
                for j in 0..nk {
                    dw[o + j] = tau * phi[j];
                    dtdw[o + j] = phi[j] + tau * dphi[j];
                }
            }
        }
        Self {
            n,
            m,
            kernels: nk,
            points: grid.points().to_vec(),
            dw,
            dtdw,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> usize {
        self.n * self.m
    }

    pub fn unknowns(&self) -> usize {
        self.m * self.kernels
    }

    pub fn state(&self, ts: &TrialSolution) -> CollocationState {
        let (n, m, nk) = (self.n, self.m, self.kernels);
        let w = ts.weights();
        let z = ts.z();
        let mut psi = vec![0.0; n * m];
        let mut dpsi = vec![0.0; n * m];
        for l in 0..n {
            for k in 0..m {
                let o = (l * m + k) * nk;
                let mut s = 0.0;
                let mut d = 0.0;
                for j in 0..nk {
                    let wkj = w[(k, j)];
                    s += wkj * self.dw[o + j];
                    d += wkj * self.dtdw[o + j];
                }
                psi[l * m + k] = z[k] + s;
                dpsi[l * m + k] = d;
            }
        }
        CollocationState { psi, dpsi }
    }

    /// Residual entries `F_{i n + l} = (M Ψ'(t_l))_i - f_i(t_l, Ψ(t_l))`.
    pub fn residual(&self, sys: &IvpSystem, st: &CollocationState) -> Result<Vec<f64>> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![0.0; n * m];
        let mut fv = vec![0.0; m];
        for l in 0..n {
            let t = self.points[l];
            let u = &st.psi[l * m..(l + 1) * m];
            let du = &st.dpsi[l * m..(l + 1) * m];
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    t,
                    reason: "non-finite trial state".into(),
                });
            }
            if !sys.admissible(u) {
                return Err(Error::Divergence {
                    t,
                    reason: "state left the problem domain".into(),
                });
            }
            sys.rhs.eval(t, u, &mut fv);
            for i in 0..m {
                let r = sys.mass.row_dot(i, du) - fv[i];
                if !r.is_finite() {
                    return Err(Error::Divergence {
                        t,
                        reason: "non-finite residual".into(),
                    });
                }
                out[i * n + l] = r;
            }
        }
        Ok(out)
    }

    fn state_jacobians(&self, sys: &IvpSystem, st: &CollocationState) -> Result<Vec<DMatrix<f64>>> {
        let m = self.m;
        (0..self.n)
            .map(|l| {
                let j = sys.jac_f(self.points[l], &st.psi[l * m..(l + 1) * m])?;
                if j.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Divergence {
                        t: self.points[l],
                        reason: "non-finite state Jacobian".into(),
                    });
                }
                Ok(j)
            })
            .collect()
    }

    /// Dense `(n m) × (m N)` Jacobian of the residual.
    pub fn jacobian_dense(&self, sys: &IvpSystem, st: &CollocationState) -> Result<DMatrix<f64>> {
        let (n, m, nk) = (self.n, self.m, self.kernels);
        let jf = self.state_jacobians(sys, st)?;
        let mut a = DMatrix::zeros(n * m, m * nk);
        for (k, rows) in sys.column_pattern().iter().enumerate() {
            for &i in rows {
                let mik = sys.mass.entry(i, k);
                for l in 0..n {
                    let jik = jf[l][(i, k)];
                    let o = (l * m + k) * nk;
                    let q = i * n + l;
                    for j in 0..nk {
                        a[(q, k * nk + j)] = mik * self.dtdw[o + j] - jik * self.dw[o + j];
                    }
                }
            }
        }
        Ok(a)
    }

    /// Sparse Jacobian holding only the blocks of the declared pattern.
    pub fn jacobian_sparse(&self, sys: &IvpSystem, st: &CollocationState) -> Result<SparseMatrix> {
        let (n, m, nk) = (self.n, self.m, self.kernels);
        let jf = self.state_jacobians(sys, st)?;
        let pattern = sys.column_pattern();
        let nnz: usize = pattern.iter().map(|r| r.len() * n * nk).sum();
        let mut col_ptr = Vec::with_capacity(m * nk + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for (k, rows) in pattern.iter().enumerate() {
            for j in 0..nk {
                for &i in rows {
                    let mik = sys.mass.entry(i, k);
                    for l in 0..n {
                        let o = (l * m + k) * nk + j;
                        row_idx.push(i * n + l);
                        values.push(mik * self.dtdw[o] - jf[l][(i, k)] * self.dw[o]);
                    }
                }
                col_ptr.push(row_idx.len());
            }
        }
        SparseMatrix::from_csc(n * m, m * nk, col_ptr, row_idx, values)
    }
}

/// Residual Jacobian in the storage chosen for the linear solve.
#[derive(Debug, Clone)]
pub enum Jacobian {
    Dense(DMatrix<f64>),
    Sparse(SparseMatrix),
}

impl Jacobian {
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Jacobian::Dense(a) => a.clone(),
            Jacobian::Sparse(s) => s.to_dense(),
        }
    }
}

fn check_dims(sys: &IvpSystem, ts: &TrialSolution) -> Result<()> {
    if sys.dim() != ts.states() {
        return Err(Error::Contract(format!(
            "system has {} states but trial solution has {}",
            sys.dim(),
            ts.states()
        )));
    }
    Ok(())
}

/// Collocation residual of `ts` on `grid`, ordered `q = i n + l`.
pub fn assemble_residual(sys: &IvpSystem, ts: &TrialSolution, grid: &CollocationGrid) -> Result<Vec<f64>> {
    check_dims(sys, ts)?;
    let c = Collocation::new(ts, grid);
    c.residual(sys, &c.state(ts))
}

/// Jacobian of [`assemble_residual`] with respect to the weights, unknown
/// `k N + j` ↔ `w_kj`.
pub fn assemble_jacobian(sys: &IvpSystem, ts: &TrialSolution, grid: &CollocationGrid, sparse: bool) -> Result<Jacobian> {
    check_dims(sys, ts)?;
    let c = Collocation::new(ts, grid);
    let st = c.state(ts);
    if sparse {
        Ok(Jacobian::Sparse(c.jacobian_sparse(sys, &st)?))
    } else {
        Ok(Jacobian::Dense(c.jacobian_dense(sys, &st)?))
    }
}
