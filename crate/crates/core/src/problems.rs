//! Benchmark catalog: stiff ODEs, index-1 DAEs and two method-of-lines PDEs.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::residual::{IvpSystem, MassMatrix, Rhs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Linear,
    /// `t_start` followed by `count - 1` log-spaced points from `first` to `t_end`.
    Log { first: f64 },
}

/// Output grid used for error tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceGrid {
    pub count: usize,
    pub spacing: Spacing,
}

impl ReferenceGrid {
    pub fn times(&self, span: (f64, f64)) -> Vec<f64> {
        grid_times(self.count, self.spacing, span)
    }
}

pub fn grid_times(count: usize, spacing: Spacing, (t0, t1): (f64, f64)) -> Vec<f64> {
    match (count, spacing) {
        (0, _) => Vec::new(),
        (1, _) => vec![t0],
        (_, Spacing::Linear) => {
            let mut v: Vec<f64> = (0..count)
                .map(|g| t0 + (t1 - t0) * g as f64 / (count - 1) as f64)
                .collect();
            v[count - 1] = t1;
            v
        }
        (_, Spacing::Log { first }) => {
            let k = count - 1;
            let (a, b) = (first.log10(), t1.log10());
            let mut v = vec![t0];
            v.extend((0..k).map(|g| {
                if k == 1 {
                    t1
                } else {
                    10f64.powf(a + (b - a) * g as f64 / (k - 1) as f64)
                }
            }));
            v[count - 1] = t1;
            v
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: &'static str,
    pub system: IvpSystem,
    pub t_span: (f64, f64),
    /// Initial state; algebraic components hold guesses for consistent
    /// initialization.
    pub u0: Vec<f64>,
    pub reference_grid: ReferenceGrid,
    /// Published error figures kept for regression context, `(label, value)`.
    pub published_context: Vec<(&'static str, f64)>,
    pub notes: &'static str,
}

impl BenchmarkSpec {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }
}

/// Names accepted by [`benchmark`].
pub const REGISTRY: &[&str] = &[
    "linear-decay",
    "vdp",
    "robertson",
    "bead-on-needle",
    "power-discharge",
    "akzo-nobel",
    "belousov-zhabotinsky",
    "allen-cahn",
    "kuramoto-sivashinsky",
];

/// Looks up a benchmark by registry name with default parameters.
pub fn benchmark(name: &str) -> Result<BenchmarkSpec> {
    match name {
        "linear-decay" => Ok(linear_decay()),
        "vdp" => Ok(vdp(100.0)),
        "robertson" => Ok(robertson()),
        "bead-on-needle" => Ok(bead_on_needle()),
        "power-discharge" => Ok(power_discharge()),
        "akzo-nobel" => Ok(akzo_nobel()),
        "belousov-zhabotinsky" => Ok(belousov_zhabotinsky()),
        "allen-cahn" => Ok(allen_cahn(0.01, 100)),
        "kuramoto-sivashinsky" => Ok(kuramoto_sivashinsky(201)),
        _ => Err(Error::Input(format!(
            "unknown problem '{name}'; available: {}",
            REGISTRY.join(", ")
        ))),
    }
}

fn system(rhs: impl Rhs + 'static, mass: MassMatrix) -> IvpSystem {
    IvpSystem::new(Arc::new(rhs), mass).expect("catalog systems are well formed")
}

fn diag_mass(m: usize, algebraic: &[usize]) -> MassMatrix {
    MassMatrix::Diagonal((0..m).map(|i| if algebraic.contains(&i) { 0.0 } else { 1.0 }).collect())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LinearDecay {
    pub rate: f64,
}

impl Rhs for LinearDecay {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        out[0] = -self.rate * u[0];
    }
    fn jacobian(&self, _t: f64, _u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac[(0, 0)] = -self.rate;
        true
    }
}

/// `u' = -u`, `u(0) = 1` on `[0, 10]`.
pub fn linear_decay() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "linear-decay",
        system: system(LinearDecay { rate: 1.0 }, MassMatrix::Identity),
        t_span: (0.0, 10.0),
        u0: vec![1.0],
        reference_grid: ReferenceGrid {
            count: 1000,
            spacing: Spacing::Linear,
        },
        published_context: Vec::new(),
        notes: "exact solution exp(-t)",
    }
}

#[derive(Debug, Clone)]
pub struct VanDerPol {
    pub mu: f64,
}

impl Rhs for VanDerPol {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        out[0] = u[1];
        out[1] = self.mu * (1.0 - u[0] * u[0]) * u[1] - u[0];
    }
    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        jac[(0, 1)] = 1.0;
        jac[(1, 0)] = -2.0 * self.mu * u[0] * u[1] - 1.0;
        jac[(1, 1)] = self.mu * (1.0 - u[0] * u[0]);
        true
    }
}

/// Van der Pol oscillator on `[0, 3μ]` from `(2, 0)`.
pub fn vdp(mu: f64) -> BenchmarkSpec {
    BenchmarkSpec {
        name: "vdp",
        system: system(VanDerPol { mu }, MassMatrix::Identity),
        t_span: (0.0, 3.0 * mu),
        u0: vec![2.0, 0.0],
        reference_grid: ReferenceGrid {
            count: 60_000,
            spacing: Spacing::Linear,
        },
        published_context: Vec::new(),
        notes: "relaxation period approx mu (3 - 2 ln 2)",
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Robertson {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl Default for Robertson {
    fn default() -> Self {
        Self {
            k1: 0.04,
            k2: 1e4,
            k3: 3e7,
        }
    }
}

impl Rhs for Robertson {
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let (a, b, c) = (u[0], u[1], u[2]);
        out[0] = -self.k1 * a + self.k2 * b * c;
        out[1] = self.k1 * a - self.k2 * b * c - self.k3 * b * b;
        out[2] = a + b + c - 1.0;
    }
    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let (b, c) = (u[1], u[2]);
        jac[(0, 0)] = -self.k1;
        jac[(0, 1)] = self.k2 * c;
        jac[(0, 2)] = self.k2 * b;
        jac[(1, 0)] = self.k1;
        jac[(1, 1)] = -self.k2 * c - 2.0 * self.k3 * b;
        jac[(1, 2)] = -self.k2 * b;
        jac[(2, 0)] = 1.0;
        jac[(2, 1)] = 1.0;
        jac[(2, 2)] = 1.0;
        true
    }
}

/// Robertson kinetics as an index-1 DAE with the mass balance `A + B + C = 1`.
pub fn robertson() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "robertson",
        system: system(Robertson::default(), diag_mass(3, &[2])),
        t_span: (0.0, 4e11),
        u0: vec![1.0, 0.0, 0.0],
        reference_grid: ReferenceGrid {
            count: 40_000,
            spacing: Spacing::Log { first: 1e-6 },
        },
        published_context: vec![("MAE(B) tol 1e-6", 2.02e-12)],
        notes: "",
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct BeadOnNeedle;

impl Rhs for BeadOnNeedle {
    fn dim(&self) -> usize {
        5
    }
    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]) {
        let (s, c) = (t + PI / 4.0).sin_cos();
        let (u1, u2, u3, u4, u5) = (u[0], u[1], u[2], u[3], u[4]);
        out[0] = u2;
        out[1] = -10.0 * u2 + s * u5;
        out[2] = u4;
        out[3] = -10.0 * u4 - c * u5 + 1.0;
        // g_pp with the derivatives replaced by the rows above
        let g = c * u3 - s * u1;
        let gp = c * (u4 - u1) + s * (-u2 - u3);
        let gpp = c * (1.0 - 10.0 * u4 - 2.0 * u2 - u3) + s * (10.0 * u2 - 2.0 * u4 + u1) - u5;
        out[4] = gpp + 20.0 * gp + 100.0 * g;
    }
    fn jacobian(&self, t: f64, _u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let (s, c) = (t + PI / 4.0).sin_cos();
        jac[(0, 1)] = 1.0;
        jac[(1, 1)] = -10.0;
        jac[(1, 4)] = s;
        jac[(2, 3)] = 1.0;
        jac[(3, 3)] = -10.0;
        jac[(3, 4)] = -c;
        jac[(4, 0)] = -99.0 * s - 20.0 * c;
        jac[(4, 1)] = -2.0 * c - 10.0 * s;
        jac[(4, 2)] = 99.0 * c - 20.0 * s;
        jac[(4, 3)] = 10.0 * c - 2.0 * s;
        jac[(4, 4)] = -1.0;
        true
    }
}

/// Bead on a rotating needle, five states with one algebraic row.
pub fn bead_on_needle() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "bead-on-needle",
        system: system(BeadOnNeedle, diag_mass(5, &[4])),
        t_span: (0.0, 15.0),
        u0: vec![1.0, -6.0, 1.0, -6.0, 0.0],
        reference_grid: ReferenceGrid {
            count: 15_000,
            spacing: Spacing::Linear,
        },
        published_context: vec![("u5(0)", -10.60660171779820)],
        notes: "constraint g_pp + 20 g_p + 100 g = 0 with u' substituted from rows 1-4",
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct PowerDischarge;

fn power_mu(t: f64) -> (f64, f64) {
    let mu = 15.0 + 5.0 * (t - 10.0).tanh();
    let ch = (t - 10.0).cosh();
    (mu, 5.0 / (ch * ch))
}

impl Rhs for PowerDischarge {
    fn dim(&self) -> usize {
        6
    }
    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]) {
        let (mu, mup) = power_mu(t);
        let (u1, u2, u3, u4, u5, u6) = (u[0], u[1], u[2], u[3], u[4], u[5]);
        let du1 = (u2 - u1) / 20.0;
        let du3 = mu - u6;
        out[0] = du1;
        out[1] = -(u4 - 99.1) / 75.0;
        out[2] = du3;
        out[3] = 20.0 * u5 - u3;
        out[4] = 3.35 - 0.075 * u6 + 0.001 * u6 * u6 - u4 / u5;
        let a = 1.2 * u1;
        let b = 1.44 * u1;
        out[5] = u3 / 400.0 * du3 + mu * mup / (a * a) - du1 * mu * mu / (b * b * b);
    }
    fn jacobian(&self, t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let (mu, mup) = power_mu(t);
        let (u1, u2, u3, u4, u5, u6) = (u[0], u[1], u[2], u[3], u[4], u[5]);
        jac[(0, 0)] = -1.0 / 20.0;
        jac[(0, 1)] = 1.0 / 20.0;
        jac[(1, 3)] = -1.0 / 75.0;
        jac[(2, 5)] = -1.0;
        jac[(3, 2)] = -1.0;
        jac[(3, 4)] = 20.0;
        jac[(4, 3)] = -1.0 / u5;
        jac[(4, 4)] = u4 / (u5 * u5);
        jac[(4, 5)] = -0.075 + 0.002 * u6;
        let k = mu * mu / (20.0 * 1.44f64.powi(3));
        jac[(5, 0)] = -2.0 * mu * mup / (1.44 * u1 * u1 * u1) + k / u1.powi(3) + 3.0 * k * (u2 - u1) / u1.powi(4);
        jac[(5, 1)] = -k / u1.powi(3);
        jac[(5, 2)] = (mu - u6) / 400.0;
        jac[(5, 5)] = -u3 / 400.0;
        true
    }
}

/// Power discharge control, six states with three algebraic rows.
pub fn power_discharge() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "power-discharge",
        system: system(PowerDischarge, diag_mass(6, &[3, 4, 5])),
        t_span: (0.0, 40.0),
        u0: vec![0.25, 0.25, 734.0, 100.0, 30.0, 10.0],
        reference_grid: ReferenceGrid {
            count: 40_000,
            spacing: Spacing::Linear,
        },
        published_context: vec![
            ("u4(0)", 99.08999492002),
            ("u5(0)", 36.7),
            ("u6(0)", 10.00000251671),
        ],
        notes: "sixth row with u1', u3' substituted; as written the model leaves \
                its domain shortly after t = 9 (u2 decreases without bound)",
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct AkzoNobel {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub kk: f64,
    pub ks: f64,
    pub kin: f64,
    pub rho: f64,
    pub h: f64,
}

impl Default for AkzoNobel {
    fn default() -> Self {
        Self {
            k1: 18.7,
            k2: 0.58,
            k3: 0.09,
            k4: 0.42,
            kk: 34.4,
            ks: 115.83,
            kin: 3.3,
            rho: 0.9,
            h: 737.0,
        }
    }
}

impl Rhs for AkzoNobel {
    fn dim(&self) -> usize {
        6
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let sq = u[1].max(0.0).sqrt();
        let r1 = self.k1 * u[0].powi(4) * sq;
        let r2 = self.k2 * u[2] * u[3];
        let r3 = self.k2 / self.kk * u[0] * u[4];
        let r4 = self.k3 * u[0] * u[3] * u[3];
        let r5 = self.k4 * u[5] * u[5] * sq;
        let fin = self.kin * (self.rho / self.h - u[1]);
        out[0] = -2.0 * r1 + r2 - r3 - r4;
        out[1] = -0.5 * r1 - r4 - 0.5 * r5 + fin;
        out[2] = r1 - r2 + r3;
        // rows 4 and 5 follow the CWI test set; the printed system swaps them
        out[3] = -r2 + r3 - 2.0 * r4;
        out[4] = r2 - r3 + r5;
        out[5] = self.ks * u[0] * u[3] - u[5];
    }
    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let sq = u[1].max(0.0).sqrt();
        let dsq = if u[1] > 0.0 { 0.5 / sq } else { 0.0 };
        let u1_4 = u[0].powi(4);
        // rate gradients, indexed [rate][state]
        let mut g = [[0.0; 6]; 5];
        g[0][0] = 4.0 * self.k1 * u[0].powi(3) * sq;
        g[0][1] = self.k1 * u1_4 * dsq;
        g[1][2] = self.k2 * u[3];
        g[1][3] = self.k2 * u[2];
        g[2][0] = self.k2 / self.kk * u[4];
        g[2][4] = self.k2 / self.kk * u[0];
        g[3][0] = self.k3 * u[3] * u[3];
        g[3][3] = 2.0 * self.k3 * u[0] * u[3];
        g[4][1] = self.k4 * u[5] * u[5] * dsq;
        g[4][5] = 2.0 * self.k4 * u[5] * sq;
        let coef = [
            [-2.0, 1.0, -1.0, -1.0, 0.0],
            [-0.5, 0.0, 0.0, -1.0, -0.5],
            [1.0, -1.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, -2.0, 0.0],
            [0.0, 1.0, -1.0, 0.0, 1.0],
        ];
        for (i, row) in coef.iter().enumerate() {
            for k in 0..6 {
                jac[(i, k)] = (0..5).map(|r| row[r] * g[r][k]).sum();
            }
        }
        jac[(1, 1)] -= self.kin;
        jac[(5, 0)] = self.ks * u[3];
        jac[(5, 3)] = self.ks * u[0];
        jac[(5, 5)] = -1.0;
        true
    }
    fn admissible(&self, u: &[f64], abstol: f64) -> bool {
        u[1] >= -abstol
    }
}

/// Chemical Akzo Nobel problem, six states with one algebraic row.
pub fn akzo_nobel() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "akzo-nobel",
        system: system(AkzoNobel::default(), diag_mass(6, &[5])),
        t_span: (0.0, 180.0),
        u0: vec![0.444, 0.0012, 0.0, 0.007, 0.0, 0.0],
        reference_grid: ReferenceGrid {
            count: 180_000,
            spacing: Spacing::Linear,
        },
        published_context: vec![("MAE(u1) tol 1e-6", 2.42e-9)],
        notes: "sqrt(u2) evaluated as sqrt(max(u2, 0)); iterates with u2 < -AbsTol are rejected",
    }
}

// ---------------------------------------------------------------------------

/// Belousov-Zhabotinsky kinetics; states ordered A, Y, X, P, B, Z, Q.
#[derive(Debug, Clone)]
pub struct BelousovZhabotinsky {
    pub k: [f64; 5],
}

impl Default for BelousovZhabotinsky {
    fn default() -> Self {
        Self {
            k: [4.72, 3e9, 1.5e4, 4e7, 1.0],
        }
    }
}

impl Rhs for BelousovZhabotinsky {
    fn dim(&self) -> usize {
        7
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let [k1, k2, k3, k4, k5] = self.k;
        let (a, y, x, b, z) = (u[0], u[1], u[2], u[4], u[5]);
        out[0] = -k1 * a * y;
        out[1] = -k1 * a * y - k2 * x * y + k5 * z;
        out[2] = k1 * a * y - k2 * x * y + k3 * b * x - 2.0 * k4 * x * x;
        out[3] = k2 * x * y;
        out[4] = -k3 * b * x;
        out[5] = k3 * b * x - k5 * z;
        out[6] = k4 * x * x;
    }
    fn jacobian(&self, _t: f64, u: &[f64], j: &mut DMatrix<f64>) -> bool {
        let [k1, k2, k3, k4, k5] = self.k;
        let (a, y, x, b) = (u[0], u[1], u[2], u[4]);
        j[(0, 0)] = -k1 * y;
        j[(0, 1)] = -k1 * a;
        j[(1, 0)] = -k1 * y;
        j[(1, 1)] = -k1 * a - k2 * x;
        j[(1, 2)] = -k2 * y;
        j[(1, 5)] = k5;
        j[(2, 0)] = k1 * y;
        j[(2, 1)] = k1 * a - k2 * x;
        j[(2, 2)] = -k2 * y + k3 * b - 4.0 * k4 * x;
        j[(2, 4)] = k3 * x;
        j[(3, 1)] = k2 * x;
        j[(3, 2)] = k2 * y;
        j[(4, 2)] = -k3 * b;
        j[(4, 4)] = -k3 * x;
        j[(5, 2)] = k3 * b;
        j[(5, 4)] = k3 * x;
        j[(5, 5)] = -k5;
        j[(6, 2)] = 2.0 * k4 * x;
        true
    }
}

pub fn belousov_zhabotinsky() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "belousov-zhabotinsky",
        system: system(BelousovZhabotinsky::default(), MassMatrix::Identity),
        t_span: (0.0, 40.0),
        u0: vec![0.066, 0.0, 0.0, 0.0, 0.066, 0.002, 0.0],
        reference_grid: ReferenceGrid {
            count: 40_000,
            spacing: Spacing::Linear,
        },
        published_context: vec![("l_inf(A) tol 1e-7", 5.87e-6)],
        notes: "state order A, Y, X, P, B, Z, Q",
    }
}

// ---------------------------------------------------------------------------

/// Allen-Cahn `u_t = ν u_xx + u - u³` on `[-1, 1]`, `u(±1) = ±1`, central
/// differences on the interior nodes.
#[derive(Debug, Clone)]
pub struct AllenCahn {
    pub nu: f64,
    pub interior: usize,
}

impl AllenCahn {
    pub fn dx(&self) -> f64 {
        2.0 / (self.interior + 1) as f64
    }

    /// Interior node positions.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (1..=self.interior).map(|i| -1.0 + i as f64 * dx).collect()
    }
}

impl Rhs for AllenCahn {
    fn dim(&self) -> usize {
        self.interior
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let m = self.interior;
        let c = self.nu / (self.dx() * self.dx());
        for i in 0..m {
            let left = if i == 0 { -1.0 } else { u[i - 1] };
            let right = if i + 1 == m { 1.0 } else { u[i + 1] };
            out[i] = c * (right - 2.0 * u[i] + left) + u[i] - u[i] * u[i] * u[i];
        }
    }
    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let m = self.interior;
        let c = self.nu / (self.dx() * self.dx());
        for i in 0..m {
            jac[(i, i)] = -2.0 * c + 1.0 - 3.0 * u[i] * u[i];
            if i > 0 {
                jac[(i, i - 1)] = c;
            }
            if i + 1 < m {
                jac[(i, i + 1)] = c;
            }
        }
        true
    }
    fn sparsity(&self) -> Option<Vec<(usize, usize)>> {
        let m = self.interior;
        let mut p = Vec::new();
        for i in 0..m {
            for k in i.saturating_sub(1)..(i + 2).min(m) {
                p.push((i, k));
            }
        }
        Some(p)
    }
}

pub fn allen_cahn(nu: f64, interior: usize) -> BenchmarkSpec {
    let ac = AllenCahn { nu, interior };
    let u0 = ac
        .nodes()
        .iter()
        .map(|&x| 0.53 * x + 0.47 * (-1.5 * PI * x).sin())
        .collect();
    BenchmarkSpec {
        name: "allen-cahn",
        system: system(ac, MassMatrix::Identity),
        t_span: (0.0, 70.0),
        u0,
        reference_grid: ReferenceGrid {
            count: 7_000,
            spacing: Spacing::Linear,
        },
        published_context: Vec::new(),
        notes: "boundary values -1 and 1 built into the first and last stencil rows",
    }
}

// ---------------------------------------------------------------------------

/// Kuramoto-Sivashinsky `u_t = -u u_x - u_xx - u_xxxx` with periodic
/// wrapping over `unknowns` nodes spaced `dx`.
#[derive(Debug, Clone)]
pub struct KuramotoSivashinsky {
    pub unknowns: usize,
    pub dx: f64,
}

impl KuramotoSivashinsky {
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.unknowns).map(|i| i as f64 * self.dx).collect()
    }
}

impl Rhs for KuramotoSivashinsky {
    fn dim(&self) -> usize {
        self.unknowns
    }
    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let m = self.unknowns;
        let dx = self.dx;
        let (c1, c2, c4) = (1.0 / (2.0 * dx), 1.0 / (dx * dx), 1.0 / dx.powi(4));
        for i in 0..m {
            let um2 = u[(i + m - 2) % m];
            let um1 = u[(i + m - 1) % m];
            let up1 = u[(i + 1) % m];
            let up2 = u[(i + 2) % m];
            let ui = u[i];
            out[i] = -ui * (up1 - um1) * c1 - (up1 - 2.0 * ui + um1) * c2
                - (up2 - 4.0 * up1 + 6.0 * ui - 4.0 * um1 + um2) * c4;
        }
    }
    fn jacobian(&self, _t: f64, u: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let m = self.unknowns;
        let dx = self.dx;
        let (c1, c2, c4) = (1.0 / (2.0 * dx), 1.0 / (dx * dx), 1.0 / dx.powi(4));
        for i in 0..m {
            let (im2, im1, ip1, ip2) = ((i + m - 2) % m, (i + m - 1) % m, (i + 1) % m, (i + 2) % m);
            jac[(i, i)] += -(u[ip1] - u[im1]) * c1 + 2.0 * c2 - 6.0 * c4;
            jac[(i, ip1)] += -u[i] * c1 - c2 + 4.0 * c4;
            jac[(i, im1)] += u[i] * c1 - c2 + 4.0 * c4;
            jac[(i, ip2)] += -c4;
            jac[(i, im2)] += -c4;
        }
        true
    }
    fn sparsity(&self) -> Option<Vec<(usize, usize)>> {
        let m = self.unknowns;
        let mut p = Vec::new();
        for i in 0..m {
            let mut ks: Vec<usize> = (0..5).map(|d| (i + m + d - 2) % m).collect();
            ks.sort_unstable();
            ks.dedup();
            p.extend(ks.into_iter().map(|k| (i, k)));
        }
        Some(p)
    }
}

/// `points` grid points with spacing `32π / points`; the last point
/// duplicates the first under periodicity, leaving `points - 1` unknowns.
pub fn kuramoto_sivashinsky(points: usize) -> BenchmarkSpec {
    let ks = KuramotoSivashinsky {
        unknowns: points - 1,
        dx: 32.0 * PI / points as f64,
    };
    let u0 = ks
        .nodes()
        .iter()
        .map(|&x| (x / 16.0).cos() * (1.0 + (x / 16.0).sin()))
        .collect();
    BenchmarkSpec {
        name: "kuramoto-sivashinsky",
        system: system(ks, MassMatrix::Identity),
        t_span: (0.0, 100.0),
        u0,
        reference_grid: ReferenceGrid {
            count: 100_000,
            spacing: Spacing::Linear,
        },
        published_context: Vec::new(),
        notes: "200 unknowns, dx = 32 pi / 201, indices wrap modulo 200",
    }
}
