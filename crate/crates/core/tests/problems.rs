use std::f64::consts::PI;

use pirpnn_core::problems::{
    allen_cahn, benchmark, grid_times, kuramoto_sivashinsky, AkzoNobel, AllenCahn, KuramotoSivashinsky, Spacing,
    REGISTRY,
};
use pirpnn_core::residual::fd_jacobian_f;
use pirpnn_core::{Error, MassMatrix, Rhs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f(name: &str, t: f64, u: &[f64]) -> Vec<f64> {
    benchmark(name).unwrap().system.f(t, u)
}

#[test]
fn registry_resolves_every_name() {
    assert_eq!(REGISTRY.len(), 9);
    for &name in REGISTRY {
        let spec = benchmark(name).unwrap();
        assert_eq!(spec.name, name);
        assert_eq!(spec.u0.len(), spec.dim());
        assert!(spec.t_span.1 > spec.t_span.0);
    }
    match benchmark("lorenz") {
        Err(Error::Input(msg)) => assert!(msg.contains("robertson") && msg.contains("vdp"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn benchmark_spans_and_initial_values() {
    let spans = [
        ("vdp", (0.0, 300.0)),
        ("robertson", (0.0, 4e11)),
        ("bead-on-needle", (0.0, 15.0)),
        ("power-discharge", (0.0, 40.0)),
        ("akzo-nobel", (0.0, 180.0)),
        ("belousov-zhabotinsky", (0.0, 40.0)),
        ("allen-cahn", (0.0, 70.0)),
        ("kuramoto-sivashinsky", (0.0, 100.0)),
    ];
    for (name, span) in spans {
        assert_eq!(benchmark(name).unwrap().t_span, span, "{name}");
    }
    assert_eq!(benchmark("vdp").unwrap().u0, vec![2.0, 0.0]);
    assert_eq!(benchmark("bead-on-needle").unwrap().u0[..4], [1.0, -6.0, 1.0, -6.0]);
    assert_eq!(benchmark("power-discharge").unwrap().u0[..3], [0.25, 0.25, 734.0]);
    assert_eq!(benchmark("akzo-nobel").unwrap().u0[..5], [0.444, 0.0012, 0.0, 0.007, 0.0]);
    assert_eq!(benchmark("belousov-zhabotinsky").unwrap().u0, vec![0.066, 0.0, 0.0, 0.0, 0.066, 0.002, 0.0]);
    let rob = benchmark("robertson").unwrap();
    assert_eq!(rob.reference_grid.count, 40_000);
    assert_eq!(rob.reference_grid.spacing, Spacing::Log { first: 1e-6 });
}

#[test]
fn van_der_pol_values() {
    assert_eq!(f("vdp", 0.0, &[2.0, 0.0]), vec![0.0, -2.0]);
    assert_eq!(f("vdp", 0.0, &[0.0, 0.0]), vec![0.0, 0.0]);
    let j = benchmark("vdp").unwrap().system.jac_f(0.0, &[2.0, 0.0]).unwrap();
    assert_eq!(j[(1, 0)], -1.0);
    assert_eq!(j[(1, 1)], 100.0 * (1.0 - 4.0));
}

#[test]
fn robertson_values() {
    let v = f("robertson", 0.0, &[1.0, 0.0, 0.0]);
    assert_eq!(v[0], -0.04);
    assert_eq!(v[2], 0.0);
    assert_eq!(f("robertson", 0.0, &[0.5, 0.3, 0.2])[2], 0.0);
}

#[test]
fn bead_on_needle_values() {
    let spec = benchmark("bead-on-needle").unwrap();
    // g = cos(π/4) u3 - sin(π/4) u1 vanishes at the initial point
    let (s, c) = (PI / 4.0).sin_cos();
    assert!((c * 1.0 - s * 1.0).abs() <= 2.0 * f64::EPSILON);
    assert_eq!(spec.system.mass(), &MassMatrix::Diagonal(vec![1.0, 1.0, 1.0, 1.0, 0.0]));
    assert_eq!(spec.system.algebraic_rows(), &[4]);
}

#[test]
fn power_discharge_values() {
    let spec = benchmark("power-discharge").unwrap();
    assert_eq!(spec.system.algebraic_rows(), &[3, 4, 5]);
    let u = [0.25, 0.25, 734.0, 99.08999492002, 36.7, 10.00000251671];
    assert!(f("power-discharge", 0.0, &u)[3].abs() < 1e-12);
    // μ(10) = 15, μ'(10) = 5: the u3 row reads μ - u6
    let v = f("power-discharge", 10.0, &[1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
    assert_eq!(v[2], 13.0);
}

#[test]
fn akzo_nobel_values() {
    let spec = benchmark("akzo-nobel").unwrap();
    assert_eq!(spec.system.mass(), &MassMatrix::Diagonal(vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.0]));
    let ak = AkzoNobel::default();
    let inflow = ak.kin * (ak.rho / ak.h - 0.0012);
    assert!((inflow - 6.985_074_626_865_7e-5).abs() < 1e-18, "{inflow}");
    let u0 = [0.444, 0.0012, 0.0, 0.007, 0.0, 115.83 * 0.444 * 0.007];
    assert!(f("akzo-nobel", 0.0, &u0)[5].abs() < 1e-15);
    // the domain guard tolerates rounding-level negativity only
    assert!(ak.admissible(&[0.4, -1e-7, 0.0, 0.0, 0.0, 0.0], 1e-6));
    assert!(!ak.admissible(&[0.4, -1e-5, 0.0, 0.0, 0.0, 0.0], 1e-6));
    let v = f("akzo-nobel", 0.0, &[0.4, -1e-7, 0.0, 0.0, 0.0, 0.0]);
    assert!(v.iter().all(|x| x.is_finite()));
}

#[test]
fn belousov_zhabotinsky_values() {
    let u0 = benchmark("belousov-zhabotinsky").unwrap().u0;
    let v = f("belousov-zhabotinsky", 0.0, &u0);
    assert_eq!(v[0], 0.0);
    assert!((v[5] + 0.002).abs() < 1e-18);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let u: Vec<f64> = (0..7).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        assert!(f("belousov-zhabotinsky", 0.0, &u)[6] >= 0.0);
    }
}

#[test]
fn allen_cahn_values() {
    let spec = benchmark("allen-cahn").unwrap();
    assert_eq!(spec.dim(), 100);
    assert!(spec.system.sparse_declared());
    let ac = AllenCahn { nu: 0.01, interior: 100 };
    assert!((ac.dx() - 2.0 / 101.0).abs() < 1e-17);
    let ic = |x: f64| 0.53 * x + 0.47 * (-1.5 * PI * x).sin();
    assert_eq!(ic(0.0), 0.0);
    assert!((ic(1.0) - 1.0).abs() < 1e-15);
    assert!((ic(-1.0) + 1.0).abs() < 1e-15);
    let v = spec.system.f(0.0, &vec![1.0; 100]);
    let c = 0.01 / (ac.dx() * ac.dx());
    assert!((v[0] + 2.0 * c).abs() < 1e-12);
    assert!(v[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn stencils_are_exact_on_lines() {
    // u = x meets both boundary values, so only the reaction term remains
    let ac = AllenCahn { nu: 0.01, interior: 100 };
    let x = ac.nodes();
    let mut out = vec![0.0; 100];
    ac.eval(0.0, &x, &mut out);
    for (i, &xi) in x.iter().enumerate() {
        assert!((out[i] - (xi - xi * xi * xi)).abs() < 1e-10, "row {i}");
    }
    let ks = KuramotoSivashinsky { unknowns: 200, dx: 32.0 * PI / 201.0 };
    let x = ks.nodes();
    let (a, b) = (0.3, -0.05);
    let u: Vec<f64> = x.iter().map(|&x| a + b * x).collect();
    let mut out = vec![0.0; 200];
    ks.eval(0.0, &u, &mut out);
    // away from the wrap, u_x = b and the higher differences vanish
    for i in 2..198 {
        assert!((out[i] + u[i] * b).abs() < 1e-9, "row {i}: {}", out[i]);
    }
}

#[test]
fn kuramoto_sivashinsky_values() {
    let spec = kuramoto_sivashinsky(201);
    assert_eq!(spec.dim(), 200);
    assert!(spec.system.sparse_declared());
    assert_eq!(spec.u0[199], {
        let x = 200.0 * 32.0 * PI / 201.0;
        (x / 16.0).cos() * (1.0 + (x / 16.0).sin())
    });
    let ic = |x: f64| (x / 16.0).cos() * (1.0 + (x / 16.0).sin());
    assert_eq!(ic(0.0), 1.0);
    assert!(spec.system.f(0.0, &vec![2.5; 200]).iter().all(|&v| v.abs() < 1e-9));
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let u: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let v = spec.system.f(0.0, &u);
        let scale: f64 = v.iter().map(|x| x.abs()).sum();
        assert!(v.iter().sum::<f64>().abs() <= 1e-12 * scale, "{}", v.iter().sum::<f64>());
    }
}

/// A state in the range the integration actually visits.
fn physical_state(name: &str, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut r = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    match name {
        "linear-decay" => vec![r(0.0, 1.0)],
        "vdp" => vec![r(-2.0, 2.0), r(-100.0, 100.0)],
        "robertson" => {
            let (a, b) = (r(0.0, 1.0), r(0.0, 4e-5));
            vec![a, b, 1.0 - a - b]
        }
        "bead-on-needle" => (0..5).map(|_| r(-10.0, 10.0)).collect(),
        "power-discharge" => vec![r(0.1, 0.5), r(0.1, 0.5), r(700.0, 800.0), r(95.0, 100.0), r(35.0, 40.0), r(5.0, 15.0)],
        "akzo-nobel" => vec![r(0.1, 0.5), r(1e-4, 1.5e-3), r(0.0, 0.2), r(0.0, 0.01), r(0.0, 0.02), r(0.0, 0.4)],
        "belousov-zhabotinsky" => vec![r(0.0, 0.07), r(0.0, 1e-6), r(0.0, 1e-6), r(0.0, 0.1), r(0.0, 0.07), r(0.0, 0.01), r(0.0, 0.1)],
        "allen-cahn" => (0..100).map(|_| r(-1.0, 1.0)).collect(),
        "kuramoto-sivashinsky" => (0..200).map(|_| r(-3.0, 3.0)).collect(),
        _ => unreachable!("{name}"),
    }
}

#[test]
fn analytic_jacobians_match_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for &name in REGISTRY {
        let spec = benchmark(name).unwrap();
        let (t0, t1) = spec.t_span;
        for _ in 0..20 {
            let u = physical_state(name, &mut rng);
            let t = t0 + (t1 - t0).min(40.0) * rng.random::<f64>();
            let an = spec.system.jac_f(t, &u).unwrap();
            // central differences, steps relative to the column and the whole state
            let m = u.len();
            let unorm = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut fd = nalgebra::DMatrix::zeros(m, m);
            for k in 0..m {
                let h = 1e-6 * (u[k].abs() + 1e-3 * unorm);
                let mut up = u.clone();
                let mut um = u.clone();
                up[k] += h;
                um[k] -= h;
                let (p, q) = (spec.system.f(t, &up), spec.system.f(t, &um));
                for i in 0..m {
                    fd[(i, k)] = (p[i] - q[i]) / (up[k] - um[k]);
                }
            }
            for i in 0..m {
                for k in 0..m {
                    let scale = an.row(i).amax().max(fd.row(i).amax()).max(1e-300);
                    let rel = (an[(i, k)] - fd[(i, k)]).abs() / scale;
                    assert!(rel <= 1e-5, "{name} ({i},{k}): {} vs {}", an[(i, k)], fd[(i, k)]);
                }
            }
            let fwd = fd_jacobian_f(&spec.system, t, &u, None).unwrap();
            assert!(fwd.iter().all(|v| v.is_finite()));
        }
    }
}

#[test]
fn declared_sparsity_covers_the_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for name in ["allen-cahn", "kuramoto-sivashinsky"] {
        let spec = benchmark(name).unwrap();
        let u = physical_state(name, &mut rng);
        let j = spec.system.jac_f(0.0, &u).unwrap();
        let pattern = spec.system.column_pattern();
        for k in 0..u.len() {
            for i in 0..u.len() {
                if j[(i, k)] != 0.0 {
                    assert!(pattern[k].contains(&i), "{name}: ({i},{k}) outside the pattern");
                }
            }
        }
    }
}

#[test]
fn algebraic_rows_match_mass() {
    let expect: &[(&str, &[usize])] = &[
        ("linear-decay", &[]),
        ("vdp", &[]),
        ("robertson", &[2]),
        ("bead-on-needle", &[4]),
        ("power-discharge", &[3, 4, 5]),
        ("akzo-nobel", &[5]),
        ("belousov-zhabotinsky", &[]),
        ("allen-cahn", &[]),
        ("kuramoto-sivashinsky", &[]),
    ];
    for &(name, rows) in expect {
        let sys = benchmark(name).unwrap().system;
        assert_eq!(sys.algebraic_rows(), rows, "{name}");
        for i in 0..sys.dim() {
            let zero_row = (0..sys.dim()).all(|k| sys.mass().entry(i, k) == 0.0);
            assert_eq!(zero_row, rows.contains(&i));
        }
    }
}

#[test]
fn reference_grids() {
    let g = grid_times(5, Spacing::Linear, (0.0, 1.0));
    assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let g = grid_times(4, Spacing::Log { first: 1e-2 }, (0.0, 1.0));
    assert_eq!(g[0], 0.0);
    assert_eq!(g[1], 1e-2);
    assert!((g[2] - 1e-1).abs() < 1e-16);
    assert_eq!(g[3], 1.0);
    let rob = benchmark("robertson").unwrap();
    let g = rob.reference_grid.times(rob.t_span);
    assert_eq!(g.len(), 40_000);
    assert_eq!(*g.last().unwrap(), 4e11);
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    assert!(allen_cahn(0.01, 100).reference_grid.count > 0);
}
