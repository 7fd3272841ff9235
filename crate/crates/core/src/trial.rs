//! Trial solution `Ψ_i(t) = z_i + (t - t0) Σ_j w_ij exp(-α_ji (t - c_j)²)`
//! and the piecewise trajectory built from accepted steps.

use nalgebra::DMatrix;

use crate::basis::RandomBasis;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSolution {
    z: Vec<f64>,
    /// m × N output weights.
    weights: DMatrix<f64>,
    basis: RandomBasis,
}

impl TrialSolution {
    pub fn new(z: Vec<f64>, weights: DMatrix<f64>, basis: RandomBasis) -> Result<Self> {
        if z.len() != basis.states() || weights.nrows() != basis.states() || weights.ncols() != basis.kernels() {
            return Err(Error::Contract(format!(
                "trial solution shapes disagree: z {}, weights {}x{}, basis {}x{}",
                z.len(),
                weights.nrows(),
                weights.ncols(),
                basis.states(),
                basis.kernels()
            )));
        }
        Ok(Self { z, weights, basis })
    }

    pub fn t0(&self) -> f64 {
        self.basis.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.basis.t_end()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.weights
    }

    pub fn basis(&self) -> &RandomBasis {
        &self.basis
    }

    pub fn states(&self) -> usize {
        self.z.len()
    }

    /// Ψ(t). Exactly `z` at `t = t0`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.basis.kernels();
        let tau = t - self.t0();
        let mut phi = vec![0.0; n];
        (0..self.states())
            .map(|i| {
                self.basis.kernels_into(i, t, &mut phi);
                let s: f64 = (0..n).map(|j| self.weights[(i, j)] * phi[j]).sum();
                self.z[i] + tau * s
            })
            .collect()
    }

    /// dΨ/dt(t).
    pub fn eval_dt(&self, t: f64) -> Vec<f64> {
        let n = self.basis.kernels();
        let tau = t - self.t0();
        let mut phi = vec![0.0; n];
        let mut dphi = vec![0.0; n];
        (0..self.states())
            .map(|i| {
                self.basis.kernels_and_slopes_into(i, t, &mut phi, &mut dphi);
                let mut s = 0.0;
                let mut g = 0.0;
                for j in 0..n {
                    let w = self.weights[(i, j)];
                    s += w * phi[j];
                    g += w * dphi[j];
                }
                s + tau * g
            })
            .collect()
    }

    /// m × N matrix of ∂Ψ_i/∂w_ij = (t - t0) exp(-α_ji (t - c_j)²).
    pub fn eval_dw(&self, t: f64) -> DMatrix<f64> {
        let n = self.basis.kernels();
        let tau = t - self.t0();
        let mut out = DMatrix::zeros(self.states(), n);
        let mut phi = vec![0.0; n];
        for i in 0..self.states() {
            self.basis.kernels_into(i, t, &mut phi);
            for j in 0..n {
                out[(i, j)] = tau * phi[j];
            }
        }
        out
    }

    /// m × N matrix of ∂²Ψ_i/∂t∂w_ij.
    pub fn eval_dtdw(&self, t: f64) -> DMatrix<f64> {
        let n = self.basis.kernels();
        let tau = t - self.t0();
        let mut out = DMatrix::zeros(self.states(), n);
        let mut phi = vec![0.0; n];
        let mut dphi = vec![0.0; n];
        for i in 0..self.states() {
            self.basis.kernels_and_slopes_into(i, t, &mut phi, &mut dphi);
            for j in 0..n {
                out[(i, j)] = phi[j] + tau * dphi[j];
            }
        }
        out
    }
}

/// Contiguous accepted subintervals covering `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    segments: Vec<TrialSolution>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a segment. It must start where the previous one ends and be
    /// anchored at the previous endpoint value.
    pub fn push(&mut self, seg: TrialSolution) -> Result<()> {
        if let Some(last) = self.segments.last() {
            if seg.t0() != last.t_end() {
                return Err(Error::Contract(format!(
                    "segment starts at {} but trajectory ends at {}",
                    seg.t0(),
                    last.t_end()
                )));
            }
            if seg.states() != last.states() {
                return Err(Error::Contract("segment state count changed".into()));
            }
        }
        self.segments.push(seg);
        Ok(())
    }

    pub fn segments(&self) -> &[TrialSolution] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn t_start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.t0())
    }

    pub fn t_end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.t_end())
    }

    /// Segment boundaries, `len() + 1` values.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.segments.iter().map(|s| s.t0()).collect();
        if let Some(e) = self.t_end() {
            k.push(e);
        }
        k
    }

    fn locate(&self, t: f64) -> Result<&TrialSolution> {
        let (Some(start), Some(end)) = (self.t_start(), self.t_end()) else {
            return Err(Error::Range {
                t,
                start: f64::NAN,
                end: f64::NAN,
            });
        };
        if !(t >= start && t <= end) {
            return Err(Error::Range { t, start, end });
        }
        // first segment whose right end reaches t, so knots go left
        let idx = self.segments.partition_point(|s| s.t_end() < t);
        Ok(&self.segments[idx.min(self.segments.len() - 1)])
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.locate(t)?.eval(t))
    }

    pub fn eval_dt(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.locate(t)?.eval_dt(t))
    }

    /// Evaluates the trajectory on `ts`; row g holds the state at `ts[g]`.
    pub fn dense_output(&self, ts: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.segments.first().map(|s| s.states()).unwrap_or(0);
        let mut out = DMatrix::zeros(ts.len(), m);
        for (g, &t) in ts.iter().enumerate() {
            let u = self.eval(t)?;
            for i in 0..m {
                out[(g, i)] = u[i];
            }
        }
        Ok(out)
    }

    /// Largest mismatch between a segment's endpoint value and the next
    /// segment's anchor.
    pub fn continuity_defect(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let end = w[0].eval(w[0].t_end());
                end.iter()
                    .zip(w[1].z())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}
