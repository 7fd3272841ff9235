//! Gaussian random-feature basis on one subinterval.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConfig {
    /// Number of kernels N.
    pub kernels: usize,
    /// Width constant c in `α_max = N² / (c² Δt²)`.
    pub c: f64,
    pub seed: u64,
    /// Draw one row of shapes and reuse it for every state.
    pub shared_shapes: bool,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            kernels: 20,
            c: 12.0,
            seed: 0,
            shared_shapes: false,
        }
    }
}

impl BasisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernels < 2 {
            return Err(Error::Input(format!("need N >= 2 kernels, got {}", self.kernels)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Input(format!("width constant c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Upper bound of the shape distribution, `N² / (c² Δt²)`.
pub fn alpha_max(kernels: usize, c: f64, dt: f64) -> f64 {
    let n = kernels as f64;
    n * n / (c * c * dt * dt)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of the stream used for attempt `attempt` of accepted-step index
/// `step`. Depends only on its arguments, so a basis can be rebuilt without
/// replaying earlier draws.
pub fn stream_seed(seed: u64, step: u64, attempt: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ step) ^ attempt.rotate_left(32))
}

/// Kernel centers and sampled shapes for one subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBasis {
    t_start: f64,
    t_end: f64,
    centers: Vec<f64>,
    /// m × N, row i holds α_·i for state i.
    shapes: DMatrix<f64>,
    alpha_max: f64,
    seed: u64,
}

/// Builds the basis on `[t_start, t_end]` for `m` states, drawing shapes
/// from a ChaCha8 stream seeded with `stream`.
pub fn build_basis(cfg: &BasisConfig, t_start: f64, t_end: f64, m: usize, stream: u64) -> Result<RandomBasis> {
    cfg.validate()?;
    let dt = t_end - t_start;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Input(format!("subinterval [{t_start}, {t_end}] is empty")));
    }
    if m == 0 {
        return Err(Error::Input("basis needs at least one state".into()));
    }
    let n = cfg.kernels;
    let spacing = dt / (n - 1) as f64;
    let mut centers: Vec<f64> = (0..n).map(|j| t_start + j as f64 * spacing).collect();
    centers[n - 1] = t_end;

    let amax = alpha_max(n, cfg.c, dt);
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let mut shapes = DMatrix::zeros(m, n);
    if cfg.shared_shapes {
        let row: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * amax).collect();
        for i in 0..m {
            for j in 0..n {
                shapes[(i, j)] = row[j];
            }
        }
    } else {
        for i in 0..m {
            for j in 0..n {
                shapes[(i, j)] = rng.random::<f64>() * amax;
            }
        }
    }
    Ok(RandomBasis {
        t_start,
        t_end,
        centers,
        shapes,
        alpha_max: amax,
        seed: stream,
    })
}

impl RandomBasis {
    /// Builds a basis from explicit parameters, mainly for tests.
    pub fn from_parts(t_start: f64, t_end: f64, centers: Vec<f64>, shapes: DMatrix<f64>) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::Input(format!("subinterval [{t_start}, {t_end}] is empty")));
        }
        if centers.len() != shapes.ncols() || shapes.nrows() == 0 || centers.is_empty() {
            return Err(Error::Contract("centers and shapes disagree on N".into()));
        }
        if shapes.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::Input("shape parameters must be finite and non-negative".into()));
        }
        let alpha_max = shapes.max();
        Ok(Self {
            t_start,
            t_end,
            centers,
            shapes,
            alpha_max,
            seed: 0,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn kernels(&self) -> usize {
        self.centers.len()
    }

    pub fn states(&self) -> usize {
        self.shapes.nrows()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn shapes(&self) -> &DMatrix<f64> {
        &self.shapes
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Writes `exp(-α_ji (t - c_j)²)` for all j into `out`.
    pub fn kernels_into(&self, i: usize, t: f64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let d = t - self.centers[j];
            *o = (-self.shapes[(i, j)] * d * d).exp();
        }
    }

    /// Writes kernel values and their time derivatives for state `i`.
    pub fn kernels_and_slopes_into(&self, i: usize, t: f64, phi: &mut [f64], dphi: &mut [f64]) {
        for j in 0..self.centers.len() {
            let d = t - self.centers[j];
            let a = self.shapes[(i, j)];
            let e = (-a * d * d).exp();
            phi[j] = e;
            dphi[j] = -2.0 * a * d * e;
        }
    }

    pub fn eval_kernels(&self, i: usize, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.kernels()];
        self.kernels_into(i, t, &mut out);
        out
    }

    /// `-2 α_ji (t - c_j) exp(-α_ji (t - c_j)²)` for all j.
    pub fn eval_kernel_derivatives(&self, i: usize, t: f64) -> Vec<f64> {
        let n = self.kernels();
        let mut phi = vec![0.0; n];
        let mut dphi = vec![0.0; n];
        self.kernels_and_slopes_into(i, t, &mut phi, &mut dphi);
        dphi
    }
}

/// Mean and variance of `exp(-α dt²)` for `α ~ U(0, α_max)`.
pub fn expected_kernel_stats(alpha_max: f64, dt: f64) -> (f64, f64) {
    let x = alpha_max * dt * dt;
    if x == 0.0 {
        return (1.0, 0.0);
    }
    if x < 1e-4 {
        let mean = 1.0 - x / 2.0 + x * x / 6.0;
        let var = x * x / 12.0 * (1.0 - x);
        return (mean, var);
    }
    let mean = -(-x).exp_m1() / x;
    let second = -(-2.0 * x).exp_m1() / (2.0 * x);
    (mean, (second - mean * mean).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_seed_separates_attempts() {
        let a = stream_seed(1, 5, 0);
        assert_ne!(a, stream_seed(1, 5, 1));
        assert_ne!(a, stream_seed(1, 6, 0));
        assert_ne!(a, stream_seed(2, 5, 0));
        assert_eq!(a, stream_seed(1, 5, 0));
    }

    #[test]
    fn shared_shapes_repeat_rows() {
        let cfg = BasisConfig {
            shared_shapes: true,
            ..Default::default()
        };
        let b = build_basis(&cfg, 0.0, 1.0, 3, 9).unwrap();
        assert_eq!(b.shapes().row(0), b.shapes().row(2));
    }

    #[test]
    fn small_argument_series_matches_closed_form() {
        for &x in &[5e-5, 2e-4, 5e-4] {
            let (m, v) = expected_kernel_stats(x, 1.0);
            let ms = 1.0 - x / 2.0 + x * x / 6.0 - x.powi(3) / 24.0 + x.powi(4) / 120.0;
            let vs = x * x / 12.0 - x.powi(3) / 12.0 + 17.0 * x.powi(4) / 360.0;
            assert!((m - ms).abs() < 1e-12);
            // the closed form loses digits to cancellation here
            assert!((v - vs).abs() < 1e-14);
        }
    }
}
