use pirpnn_core::problems::BenchmarkSpec;
use pirpnn_core::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::reference::ReferenceTrajectory;
use crate::run::solve_benchmark;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub c_values: Vec<f64>,
    pub kernel_counts: Vec<usize>,
    /// Seeds per cell, `base.seed .. base.seed + seeds`.
    pub seeds: usize,
    /// Everything except `c` and `kernels` is taken from here.
    pub base: SolverConfig,
    pub t_end: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            c_values: vec![4.0, 8.0, 12.0, 16.0, 20.0],
            kernel_counts: vec![10, 15, 20, 25, 30],
            seeds: 5,
            base: SolverConfig::with_tol(1e-6),
            t_end: None,
        }
    }
}

/// `count` evenly spaced values from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(BenchError::Input(format!("empty range {lo}..{hi} with {count} steps")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub c: f64,
    pub kernels: usize,
    /// `bias + variance`; `None` when a seed failed.
    pub score: Option<f64>,
    /// Σ (seed mean - reference)² over grid points and states.
    pub bias: Option<f64>,
    /// Σ population variance over seeds, same sum.
    pub variance: Option<f64>,
    /// Mean solve time per seed.
    pub time_s: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub problem: String,
    /// Sorted by `(c, kernels)`.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, c: f64, kernels: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|x| x.c == c && x.kernels == kernels)
    }

    /// Cell with the lowest score.
    pub fn best(&self) -> Option<&SweepCell> {
        self.cells
            .iter()
            .filter(|x| x.score.is_some())
            .min_by(|a, b| a.score.unwrap().total_cmp(&b.score.unwrap()))
    }
}

/// Scores every `(c, N)` pair by squared bias plus seed variance of the
/// dense output against `reference`.
pub fn sweep_cn(spec: &BenchmarkSpec, cfg: &SweepConfig, reference: &ReferenceTrajectory) -> Result<SweepResult> {
    if cfg.c_values.is_empty() || cfg.kernel_counts.is_empty() || cfg.seeds == 0 {
        return Err(BenchError::Input("sweep needs at least one c, one N and one seed".into()));
    }
    if reference.dim() != spec.dim() {
        return Err(BenchError::Input(format!(
            "reference has {} states but {} has {}",
            reference.dim(),
            spec.name,
            spec.dim()
        )));
    }
    let span = (spec.t_span.0, cfg.t_end.unwrap_or(spec.t_span.1));
    let reference = reference.restrict(span);
    if reference.is_empty() {
        return Err(BenchError::Input("reference has no points inside the span".into()));
    }
    let times = &reference.times;
    let (g, m) = reference.states.shape();

    let mut cells = Vec::new();
    for &c in &cfg.c_values {
        for &kernels in &cfg.kernel_counts {
            let mut outputs = Vec::with_capacity(cfg.seeds);
            let mut wall = 0.0;
            let mut failure = None;
            for r in 0..cfg.seeds as u64 {
                let run = SolverConfig {
                    c,
                    kernels,
                    seed: cfg.base.seed.wrapping_add(r),
                    ..cfg.base.clone()
                };
                let out = solve_benchmark(spec, &run, span).and_then(|(traj, stats)| {
                    wall += stats.wall_time;
                    traj.dense_output(times)
                });
                match out {
                    Ok(u) => outputs.push(u),
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
            let s = cfg.seeds as f64;
            let (bias, variance) = if failure.is_none() {
                let mut bias = 0.0;
                let mut var = 0.0;
                for k in 0..g * m {
                    let mean = outputs.iter().map(|u| u[k]).sum::<f64>() / s;
                    let d = mean - reference.states[k];
                    bias += d * d;
                    var += outputs.iter().map(|u| (u[k] - mean) * (u[k] - mean)).sum::<f64>() / s;
                }
                (Some(bias), Some(var))
            } else {
                (None, None)
            };
            cells.push(SweepCell {
                c,
                kernels,
                score: bias.zip(variance).map(|(b, v)| b + v),
                bias,
                variance,
                time_s: wall / s,
                failure,
            });
        }
    }
    cells.sort_by(|a, b| a.c.total_cmp(&b.c).then(a.kernels.cmp(&b.kernels)));
    Ok(SweepResult {
        problem: spec.name.to_string(),
        cells,
    })
}
