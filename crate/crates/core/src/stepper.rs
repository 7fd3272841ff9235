//! Adaptive time stepping: starting step, quasi-Newton collocation solve,
//! weighted error control and continuation between subintervals.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::basis::{build_basis, stream_seed, BasisConfig, RandomBasis};
use crate::dae_init::{make_consistent, ConsistencyProblem};
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{factorize_pinv, SparseQr, SparseQrOptions, TruncatedSvd};
use crate::residual::{make_grid, Collocation, CollocationGrid, IvpSystem, MassMatrix};
use crate::trial::{TrialSolution, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Sparse QR above the size threshold or when the problem declares a
    /// sparse Jacobian, truncated SVD otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Kernels per state, N.
    pub kernels: usize,
    /// Collocation points per step, n.
    pub points: usize,
    pub c: f64,
    pub abstol: f64,
    pub reltol: f64,
    /// ν_max.
    pub max_iterations: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub safety: f64,
    pub seed: u64,
    pub linear_solver: LinearSolver,
    /// Unknown count m N above which `Auto` picks the sparse path.
    pub sparse_threshold: usize,
    /// The Jacobian is refactorized while ν < `refresh_iterations`.
    pub refresh_iterations: usize,
    /// SVD truncation threshold; `None` uses the default.
    pub svd_threshold: Option<f64>,
    /// Tikhonov weight of the sparse QR.
    pub regularization: f64,
    pub shared_shapes: bool,
    /// Overrides the automatic starting step.
    pub initial_step: Option<f64>,
    /// Run consistent initialization before integrating a DAE.
    pub auto_consistent: bool,
    /// Upper bound on step attempts.
    pub max_attempts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kernels: 20,
            points: 20,
            c: 12.0,
            abstol: 1e-6,
            reltol: 1e-6,
            max_iterations: 5,
            gamma_min: 0.1,
            gamma_max: 4.0,
            safety: 0.8,
            seed: 0,
            linear_solver: LinearSolver::Auto,
            sparse_threshold: 1000,
            refresh_iterations: 2,
            svd_threshold: None,
            regularization: 0.0,
            shared_shapes: false,
            initial_step: None,
            auto_consistent: false,
            max_attempts: 200_000,
        }
    }
}

impl SolverConfig {
    /// Default configuration with both tolerances set to `tol`.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abstol: tol,
            reltol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.basis_config().validate()?;
        if self.points < 2 {
            return Err(Error::Input(format!("need n >= 2 collocation points, got {}", self.points)));
        }
        if !(self.abstol > 0.0) || !(self.reltol > 0.0) || !self.abstol.is_finite() || !self.reltol.is_finite() {
            return Err(Error::Input("tolerances must be positive".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Input("need at least one Newton iteration".into()));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min < 1.0 && self.gamma_max > 1.0 && self.gamma_max.is_finite()) {
            return Err(Error::Input(format!(
                "step bounds must satisfy 0 < γ_min < 1 < γ_max, got {} and {}",
                self.gamma_min, self.gamma_max
            )));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::Input(format!("safety factor must lie in (0, 1], got {}", self.safety)));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::Input(format!("initial step must be positive, got {h}")));
            }
        }
        Ok(())
    }

    pub fn basis_config(&self) -> BasisConfig {
        BasisConfig {
            kernels: self.kernels,
            c: self.c,
            seed: self.seed,
            shared_shapes: self.shared_shapes,
        }
    }

    fn use_sparse(&self, sys: &IvpSystem) -> bool {
        match self.linear_solver {
            LinearSolver::Dense => false,
            LinearSolver::Sparse => true,
            LinearSolver::Auto => sys.dim() * self.kernels > self.sparse_threshold || sys.sparse_declared(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub accepted: bool,
    pub err: f64,
    /// Newton updates applied, ν.
    pub iterations: usize,
    pub dt: f64,
    pub dt_next: f64,
    pub factorizations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_iterations: usize,
    pub factorizations: usize,
    pub wall_time: f64,
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut c = 0usize;
    for x in v {
        s += x * x;
        c += 1;
    }
    if c == 0 {
        0.0
    } else {
        (s / c as f64).sqrt()
    }
}

/// Starting step of order one, measured over the differential components.
pub fn initial_step(sys: &IvpSystem, t0: f64, z: &[f64], abstol: f64, reltol: f64) -> Result<f64> {
    if z.len() != sys.dim() {
        return Err(Error::Contract(format!("state has length {}, expected {}", z.len(), sys.dim())));
    }
    ensure_finite(z, "initial state")?;
    let diff = sys.differential_rows();
    let f0 = sys.f(t0, z);
    if f0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("right-hand side is not finite at t = {t0}")));
    }
    let slope = |i: usize, f: &[f64]| match sys.mass() {
        MassMatrix::Diagonal(d) => f[i] / d[i],
        _ => f[i],
    };
    let sc: Vec<f64> = z.iter().map(|v| abstol + v.abs() * reltol).collect();
    let d0 = rms(diff.iter().map(|&i| z[i] / sc[i]));
    let d1 = rms(diff.iter().map(|&i| slope(i, &f0) / sc[i]));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };

    let mut z1 = z.to_vec();
    for &i in &diff {
        z1[i] = z[i] + h0 * slope(i, &f0);
    }
    let f1 = sys.f(t0 + h0, &z1);
    let d2 = rms(diff.iter().map(|&i| (slope(i, &f1) - slope(i, &f0)) / sc[i])) / h0;
    let h1 = if d1.max(d2) <= 1e-15 || !d2.is_finite() {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).sqrt()
    };
    Ok((100.0 * h0).min(h1))
}

/// `sqrt(Σ_q (F_q / (AbsTol + RelTol |Ψ'_q|))²)`.
pub fn error_measure(f: &[f64], dpsi: &[f64], abstol: f64, reltol: f64) -> f64 {
    f.iter()
        .zip(dpsi)
        .map(|(&fq, &d)| {
            let r = fq / (abstol + reltol * d.abs());
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Step size factor `clamp((1/err)^(1/(ν+1)), γ_min, γ_max)` scaled by the
/// safety factor.
pub fn adapt_step(err: f64, nu: usize, dt: f64, cfg: &SolverConfig) -> f64 {
    let gamma = if err == 0.0 {
        cfg.gamma_max
    } else {
        (1.0 / err).powf(1.0 / (nu as f64 + 1.0))
    };
    let gamma = if gamma.is_nan() { cfg.gamma_min } else { gamma.clamp(cfg.gamma_min, cfg.gamma_max) };
    cfg.safety * gamma * dt
}

/// Weights whose kernel sum reproduces `der` at the first collocation point.
pub fn continuation_from_derivative(der: &[f64], basis: &RandomBasis, grid: &CollocationGrid) -> DMatrix<f64> {
    let (m, n) = (basis.states(), basis.kernels());
    let t = grid.points()[0];
    let mut w = DMatrix::zeros(m, n);
    let mut phi = vec![0.0; n];
    for i in 0..m {
        if der[i] == 0.0 {
            continue;
        }
        basis.kernels_into(i, t, &mut phi);
        let nrm2: f64 = phi.iter().map(|p| p * p).sum();
        for j in 0..n {
            w[(i, j)] = der[i] * phi[j] / nrm2;
        }
    }
    w
}

/// Warm start for the step following `prev`; zero weights when there is no
/// previous step.
pub fn continuation_guess(prev: Option<&TrialSolution>, t_k: f64, basis: &RandomBasis, grid: &CollocationGrid) -> DMatrix<f64> {
    let der = match prev {
        Some(p) => p.eval_dt(t_k),
        None => vec![0.0; basis.states()],
    };
    continuation_from_derivative(&der, basis, grid)
}

enum Factor {
    Dense(TruncatedSvd),
    Sparse(SparseQr),
}

impl Factor {
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Factor::Dense(f) => f.apply(b),
            Factor::Sparse(f) => f.solve(b),
        }
    }
}

fn factorize(coll: &Collocation, sys: &IvpSystem, st: &crate::residual::CollocationState, sparse: bool, cfg: &SolverConfig) -> Result<Factor> {
    if sparse {
        let a = coll.jacobian_sparse(sys, st)?;
        let opts = SparseQrOptions {
            regularization: cfg.regularization,
            ..Default::default()
        };
        Ok(Factor::Sparse(SparseQr::factorize(&a, &opts)?))
    } else {
        let a = coll.jacobian_dense(sys, st)?;
        Ok(Factor::Dense(factorize_pinv(&a, cfg.svd_threshold)?))
    }
}

/// Quasi-Newton solve of the collocation equations on one subinterval.
pub fn newton_step(
    sys: &IvpSystem,
    basis: &RandomBasis,
    z: &[f64],
    grid: &CollocationGrid,
    w_init: DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<(TrialSolution, StepReport)> {
    let mut ts = TrialSolution::new(z.to_vec(), w_init, basis.clone())?;
    if sys.dim() != ts.states() {
        return Err(Error::Contract("system and basis disagree on the state count".into()));
    }
    let sparse = cfg.use_sparse(sys);
    let coll = Collocation::new(&ts, grid);
    let (m, n, nk) = (sys.dim(), grid.len(), basis.kernels());
    let dt = basis.t_end() - basis.t_start();
    let mut factor: Option<Factor> = None;
    let mut factorizations = 0;
    let mut nu = 0;
    let mut dpsi_q = vec![0.0; m * n];

    let reject = |nu: usize, factorizations: usize| StepReport {
        accepted: false,
        err: f64::INFINITY,
        iterations: nu,
        dt,
        dt_next: adapt_step(f64::INFINITY, nu, dt, cfg),
        factorizations,
    };

    loop {
        let st = coll.state(&ts);
        let f = match coll.residual(sys, &st) {
            Ok(f) => f,
            Err(Error::Divergence { .. }) => return Ok((ts, reject(nu, factorizations))),
            Err(e) => return Err(e),
        };
        for l in 0..n {
            for i in 0..m {
                dpsi_q[i * n + l] = st.dpsi[l * m + i];
            }
        }
        let err = error_measure(&f, &dpsi_q, cfg.abstol, cfg.reltol);
        let err = if err.is_nan() { f64::INFINITY } else { err };
        if err < 1.0 || nu == cfg.max_iterations {
            let report = StepReport {
                accepted: err < 1.0,
                err,
                iterations: nu,
                dt,
                dt_next: adapt_step(err, nu, dt, cfg),
                factorizations,
            };
            return Ok((ts, report));
        }
        if nu < cfg.refresh_iterations || factor.is_none() {
            match factorize(&coll, sys, &st, sparse, cfg) {
                Ok(fac) => factor = Some(fac),
                Err(Error::Divergence { .. }) | Err(Error::Input(_)) => return Ok((ts, reject(nu, factorizations))),
                Err(e) => return Err(e),
            }
            factorizations += 1;
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = match factor.as_ref().expect("factorized above").solve(&rhs) {
            Ok(d) => d,
            Err(Error::Input(_)) => return Ok((ts, reject(nu, factorizations))),
            Err(e) => return Err(e),
        };
        if delta.iter().any(|v| !v.is_finite()) {
            return Ok((ts, reject(nu, factorizations)));
        }
        let w = ts.weights_mut();
        for k in 0..m {
            for j in 0..nk {
                w[(k, j)] += delta[k * nk + j];
            }
        }
        nu += 1;
    }
}

/// Smallest step allowed at time `t`.
pub fn min_step(t: f64) -> f64 {
    16.0 * f64::EPSILON * t.abs().max(1.0)
}

/// Integrates `sys` from `z` over `span`.
pub fn solve(sys: &IvpSystem, span: (f64, f64), z: &[f64], cfg: &SolverConfig) -> Result<(Trajectory, SolveStats)> {
    let clock = Instant::now();
    cfg.validate()?;
    let (t0, t_end) = span;
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::Input(format!("empty time span [{t0}, {t_end}]")));
    }
    let m = sys.dim();
    if z.len() != m {
        return Err(Error::Contract(format!("initial state has length {}, expected {m}", z.len())));
    }
    ensure_finite(z, "initial state")?;
    let mut z = z.to_vec();
    if sys.is_dae() && cfg.auto_consistent {
        let cp = ConsistencyProblem::new(sys.clone(), t0, z.clone());
        let v = make_consistent(&cp)?;
        for (&k, vk) in cp.algebraic_vars().iter().zip(v) {
            z[k] = vk;
        }
    }
    let sys = sys.with_domain_tolerance(cfg.abstol);
    let bcfg = cfg.basis_config();

    let mut dt = match cfg.initial_step {
        Some(h) => h,
        None => initial_step(&sys, t0, &z, cfg.abstol, cfg.reltol)?,
    };
    let mut traj = Trajectory::new();
    let mut stats = SolveStats::default();
    let mut der = vec![0.0; m];
    let mut t = t0;
    let mut step: u64 = 0;
    let mut attempt: u64 = 0;
    let mut attempts = 0usize;

    while t < t_end {
        attempts += 1;
        if attempts > cfg.max_attempts {
            return Err(Error::Stall { t, dt });
        }
        let t_next = if t + dt >= t_end { t_end } else { t + dt };
        let h = t_next - t;
        if !(h >= min_step(t)) {
            return Err(Error::Stall { t, dt: h });
        }
        let basis = build_basis(&bcfg, t, t_next, m, stream_seed(cfg.seed, step, attempt))?;
        let grid = match make_grid(t, t_next, cfg.points) {
            Ok(g) => g,
            Err(_) => return Err(Error::Stall { t, dt: h }),
        };
        let w0 = continuation_from_derivative(&der, &basis, &grid);
        let (ts, rep) = newton_step(&sys, &basis, &z, &grid, w0, cfg)?;
        stats.newton_iterations += rep.iterations;
        stats.factorizations += rep.factorizations;
        dt = rep.dt_next;
        if rep.accepted {
            let z_next = ts.eval(t_next);
            if z_next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    t: t_next,
                    reason: "non-finite state".into(),
                });
            }
            der = ts.eval_dt(t_next);
            z = z_next;
            traj.push(ts)?;
            t = t_next;
            step += 1;
            attempt = 0;
            stats.accepted += 1;
        } else {
            attempt += 1;
            stats.rejected += 1;
        }
    }
    stats.wall_time = clock.elapsed().as_secs_f64();
    Ok((traj, stats))
}
