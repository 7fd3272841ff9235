use nalgebra::DMatrix;
use pirpnn_core::dae_init::consistent_state;
use pirpnn_core::problems::{grid_times, BenchmarkSpec};
use pirpnn_core::{solve, Error, SolveStats, SolverConfig, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::metrics::{compute_errors, mean_errors, StateErrors};
use crate::reference::ReferenceTrajectory;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub solver: SolverConfig,
    /// Independent runs; run `r` uses seed `solver.seed + r`.
    pub runs: usize,
    /// Overrides the end of the benchmark span.
    pub t_end: Option<f64>,
    /// Number of points of the self-reference grid; defaults to the
    /// benchmark's reference grid.
    pub grid_points: Option<usize>,
    /// Without a reference, compare against a run at `tol / factor`.
    pub self_reference_factor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            runs: 10,
            t_end: None,
            grid_points: None,
            self_reference_factor: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub reason: String,
    /// Last time the solver reached.
    pub t_reached: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub problem: String,
    pub t_span: (f64, f64),
    pub abstol: f64,
    pub reltol: f64,
    pub kernels: usize,
    pub points: usize,
    pub c: f64,
    pub seeds: Vec<u64>,
    pub grid_points: usize,
    /// True when errors are measured against a tighter run of the solver.
    pub self_referenced: bool,
    /// Seed-averaged per-state errors.
    pub per_state: Vec<StateErrors>,
    /// Errors over all states: summed l2 in quadrature, max, mean.
    pub aggregate: Option<StateErrors>,
    pub timing: Option<Timing>,
    pub accepted_steps: Vec<usize>,
    pub rejected_steps: Vec<usize>,
    pub failure: Option<Failure>,
}

impl ErrorReport {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Report plus the trajectories of the runs that finished.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub report: ErrorReport,
    pub trajectories: Vec<Trajectory>,
    /// Grid the errors were evaluated on.
    pub times: Vec<f64>,
}

/// Makes the initial state consistent (for DAEs) and integrates over `span`.
pub fn solve_benchmark(
    spec: &BenchmarkSpec,
    cfg: &SolverConfig,
    span: (f64, f64),
) -> pirpnn_core::Result<(Trajectory, SolveStats)> {
    let z = if spec.system.is_dae() {
        consistent_state(&spec.system, span.0, &spec.u0)?
    } else {
        spec.u0.clone()
    };
    solve(&spec.system, span, &z, cfg)
}

fn failure_time(e: &Error, t0: f64) -> Option<f64> {
    match e {
        Error::Stall { t, .. } | Error::Divergence { t, .. } => Some(*t),
        Error::Init { .. } => Some(t0),
        _ => None,
    }
}

fn aggregate(per_state: &[StateErrors], points: usize) -> StateErrors {
    let m = per_state.len().max(1) as f64;
    StateErrors {
        l2: per_state.iter().map(|e| e.l2 * e.l2).sum::<f64>().sqrt(),
        linf: per_state.iter().map(|e| e.linf).fold(0.0, f64::max),
        mae: if points == 0 { 0.0 } else { per_state.iter().map(|e| e.mae).sum::<f64>() / m },
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs `opts.runs` seeds of one benchmark and tabulates errors against
/// `reference`, or against a tighter solver run when none is given.
///
/// Solver failures end up in `report.failure`; bad input is an `Err`.
pub fn run_benchmark(
    spec: &BenchmarkSpec,
    opts: &RunOptions,
    reference: Option<&ReferenceTrajectory>,
) -> Result<BenchmarkRun> {
    if opts.runs == 0 {
        return Err(BenchError::Input("at least one run is required".into()));
    }
    let span = (spec.t_span.0, opts.t_end.unwrap_or(spec.t_span.1));
    if !(span.1 > span.0) {
        return Err(BenchError::Input(format!("empty time span [{}, {}]", span.0, span.1)));
    }
    let cfg = &opts.solver;
    cfg.validate()?;
    let seeds: Vec<u64> = (0..opts.runs as u64).map(|r| cfg.seed.wrapping_add(r)).collect();

    let mut report = ErrorReport {
        schema_version: SCHEMA_VERSION,
        problem: spec.name.to_string(),
        t_span: span,
        abstol: cfg.abstol,
        reltol: cfg.reltol,
        kernels: cfg.kernels,
        points: cfg.points,
        c: cfg.c,
        seeds: seeds.clone(),
        grid_points: 0,
        self_referenced: reference.is_none(),
        per_state: Vec::new(),
        aggregate: None,
        timing: None,
        accepted_steps: Vec::new(),
        rejected_steps: Vec::new(),
        failure: None,
    };

    let fail = |e: Error, seed: u64| -> Result<Failure> {
        match failure_time(&e, span.0) {
            Some(t_reached) => Ok(Failure {
                seed,
                reason: e.to_string(),
                t_reached,
            }),
            None => Err(e.into()),
        }
    };

    let (times, target): (Vec<f64>, DMatrix<f64>) = match reference {
        Some(r) => {
            if r.dim() != spec.dim() {
                return Err(BenchError::Input(format!(
                    "reference has {} states but {} has {}",
                    r.dim(),
                    spec.name,
                    spec.dim()
                )));
            }
            if let Some(p) = &r.problem {
                if p != spec.name {
                    return Err(BenchError::Input(format!("reference is for {p}, not {}", spec.name)));
                }
            }
            let r = r.restrict(span);
            if r.is_empty() {
                return Err(BenchError::Input("reference has no points inside the span".into()));
            }
            (r.times, r.states)
        }
        None => {
            let count = opts.grid_points.unwrap_or(spec.reference_grid.count);
            let times = grid_times(count, spec.reference_grid.spacing, span);
            let factor = opts.self_reference_factor;
            let tight = SolverConfig {
                abstol: cfg.abstol / factor,
                reltol: cfg.reltol / factor,
                ..cfg.clone()
            };
            match solve_benchmark(spec, &tight, span) {
                Ok((traj, _)) => {
                    let target = traj.dense_output(&times)?;
                    (times, target)
                }
                Err(e) => {
                    let mut f = fail(e, seeds[0])?;
                    f.reason = format!("self reference: {}", f.reason);
                    report.failure = Some(f);
                    return Ok(BenchmarkRun {
                        report,
                        trajectories: Vec::new(),
                        times,
                    });
                }
            }
        }
    };
    report.grid_points = times.len();

    let mut tables = Vec::new();
    let mut walls = Vec::new();
    let mut trajectories = Vec::new();
    for &seed in &seeds {
        let run_cfg = SolverConfig { seed, ..cfg.clone() };
        match solve_benchmark(spec, &run_cfg, span) {
            Ok((traj, stats)) => {
                let sol = traj.dense_output(&times)?;
                tables.push(compute_errors(&sol, &target)?);
                walls.push(stats.wall_time);
                report.accepted_steps.push(stats.accepted);
                report.rejected_steps.push(stats.rejected);
                trajectories.push(traj);
            }
            Err(e) => {
                report.failure = Some(fail(e, seed)?);
                break;
            }
        }
    }
    if !walls.is_empty() {
        report.timing = Some(Timing {
            min_s: walls.iter().copied().fold(f64::INFINITY, f64::min),
            max_s: walls.iter().copied().fold(0.0, f64::max),
            median_s: median(&mut walls),
        });
    }
    if report.failure.is_none() {
        report.per_state = mean_errors(&tables);
        report.aggregate = Some(aggregate(&report.per_state, times.len()));
    }
    Ok(BenchmarkRun {
        report,
        trajectories,
        times,
    })
}
