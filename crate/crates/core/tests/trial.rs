use nalgebra::DMatrix;
use pirpnn_core::basis::{build_basis, BasisConfig, RandomBasis};
use pirpnn_core::{Error, Trajectory, TrialSolution};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_trial(seed: u64, m: usize, t0: f64, dt: f64, scale: f64) -> TrialSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = build_basis(&BasisConfig::default(), t0, t0 + dt, m, rng.random()).unwrap();
    let z: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    let w = DMatrix::from_fn(m, 20, |_, _| (rng.random::<f64>() * 2.0 - 1.0) * scale);
    TrialSolution::new(z, w, basis).unwrap()
}

#[test]
fn anchor_value_for_any_weights() {
    let ts = random_trial(1, 3, 2.0, 0.7, 50.0);
    assert_eq!(ts.eval(2.0), ts.z());
    let zero = TrialSolution::new(ts.z().to_vec(), DMatrix::zeros(3, 20), ts.basis().clone()).unwrap();
    for t in [2.0, 2.3, 2.7] {
        assert_eq!(zero.eval(t), ts.z());
        assert!(zero.eval_dt(t).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn hand_evaluated_single_kernel() {
    // N = 1 is below the solver's minimum; build the basis by hand
    let basis = RandomBasis::from_parts(0.0, 3.0, vec![1.5], DMatrix::zeros(1, 1)).unwrap();
    let ts = TrialSolution::new(vec![0.0], DMatrix::from_element(1, 1, 1.0), basis).unwrap();
    assert_eq!(ts.eval(2.0), vec![2.0]);
    assert_eq!(ts.eval_dt(2.0), vec![1.0]);
}

#[test]
fn derivative_at_anchor_drops_second_term() {
    let ts = random_trial(2, 2, 0.0, 1.0, 1.0);
    let d = ts.eval_dt(0.0);
    for i in 0..2 {
        let phi = ts.basis().eval_kernels(i, 0.0);
        let s: f64 = (0..20).map(|j| ts.weights()[(i, j)] * phi[j]).sum();
        assert!((d[i] - s).abs() < 1e-14);
    }
    let dtdw = ts.eval_dtdw(0.0);
    for i in 0..2 {
        let phi = ts.basis().eval_kernels(i, 0.0);
        for j in 0..20 {
            assert_eq!(dtdw[(i, j)], phi[j]);
        }
    }
    assert!(ts.eval_dw(0.0).iter().all(|&v| v == 0.0));
}

#[test]
fn flat_kernels() {
    let basis = RandomBasis::from_parts(1.0, 2.0, vec![1.0, 1.5, 2.0], DMatrix::zeros(2, 3)).unwrap();
    let ts = TrialSolution::new(vec![0.0; 2], DMatrix::from_element(2, 3, 0.4), basis).unwrap();
    assert!(ts.eval_dw(1.75).iter().all(|&v| v == 0.75));
    assert!(ts.eval_dtdw(1.3).iter().all(|&v| v == 1.0));
}

#[test]
fn shape_mismatch_is_a_contract_error() {
    let basis = build_basis(&BasisConfig::default(), 0.0, 1.0, 2, 0).unwrap();
    assert!(matches!(
        TrialSolution::new(vec![0.0; 3], DMatrix::zeros(2, 20), basis.clone()),
        Err(Error::Contract(_))
    ));
    assert!(matches!(TrialSolution::new(vec![0.0; 2], DMatrix::zeros(2, 19), basis), Err(Error::Contract(_))));
}

fn chain(seed: u64, segments: usize) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traj = Trajectory::new();
    let mut t = 0.0;
    let mut z = vec![1.0, -1.0];
    for _ in 0..segments {
        let dt = 0.1 + rng.random::<f64>();
        let basis = build_basis(&BasisConfig::default(), t, t + dt, 2, rng.random()).unwrap();
        let w = DMatrix::from_fn(2, 20, |_, _| rng.random::<f64>() - 0.5);
        let ts = TrialSolution::new(z.clone(), w, basis).unwrap();
        z = ts.eval(t + dt);
        t += dt;
        traj.push(ts).unwrap();
    }
    traj
}

#[test]
fn knots_are_continuous_and_resolve_left() {
    let traj = chain(3, 12);
    assert_eq!(traj.continuity_defect(), 0.0);
    let knots = traj.knots();
    assert_eq!(knots.len(), 13);
    for (k, &t) in knots.iter().enumerate().skip(1).take(11) {
        let left = &traj.segments()[k - 1];
        let right = &traj.segments()[k];
        assert_eq!(traj.eval(t).unwrap(), left.eval(t));
        assert_eq!(left.eval(t), right.z());
        assert_eq!(traj.eval_dt(t).unwrap(), left.eval_dt(t));
    }
}

#[test]
fn dense_output_layout_and_range() {
    let traj = chain(4, 5);
    let start = traj.t_start().unwrap();
    let end = traj.t_end().unwrap();
    let out = traj.dense_output(&[start]).unwrap();
    assert_eq!(out.shape(), (1, 2));
    assert_eq!(out[(0, 0)], 1.0);
    assert_eq!(out[(0, 1)], -1.0);
    let mut ts: Vec<f64> = (0..50).map(|g| start + (end - start) * g as f64 / 49.0).collect();
    ts[49] = end;
    let out = traj.dense_output(&ts).unwrap();
    assert_eq!(out.shape(), (50, 2));
    assert_eq!(out.row(49).iter().copied().collect::<Vec<_>>(), traj.eval(end).unwrap());
    assert!(matches!(traj.dense_output(&[end + 1e-9]), Err(Error::Range { .. })));
    assert!(matches!(traj.eval(start - 1.0), Err(Error::Range { .. })));
    assert!(matches!(Trajectory::new().eval(0.0), Err(Error::Range { .. })));
}

#[test]
fn push_requires_contiguity() {
    let mut traj = chain(5, 2);
    let end = traj.t_end().unwrap();
    let basis = build_basis(&BasisConfig::default(), end + 0.5, end + 1.0, 2, 0).unwrap();
    let ts = TrialSolution::new(vec![0.0; 2], DMatrix::zeros(2, 20), basis).unwrap();
    assert!(matches!(traj.push(ts), Err(Error::Contract(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn anchor_is_bit_exact(seed in any::<u64>(), t0 in -1e6f64..1e6, dt in 1e-8f64..1e3, scale in 1e-6f64..1e6) {
        let ts = random_trial(seed, 3, t0, dt, scale);
        prop_assert_eq!(ts.eval(t0), ts.z().to_vec());
    }

    #[test]
    fn time_derivative_matches_fd(seed in any::<u64>(), frac in 0.0f64..1.0, dt in 1e-2f64..10.0) {
        let ts = random_trial(seed, 3, 0.0, dt, 1.0 / dt);
        let t = frac * dt;
        let h = 1e-5 * dt;
        let d = ts.eval_dt(t);
        let (p, q) = (ts.eval(t + h), ts.eval(t - h));
        for i in 0..3 {
            prop_assert!(((p[i] - q[i]) / (2.0 * h) - d[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn weight_derivatives_match_fd(seed in any::<u64>(), frac in 0.0f64..1.0, dt in 1e-2f64..10.0) {
        let ts = random_trial(seed, 2, 0.0, dt, 1.0 / dt);
        let t = frac * dt;
        let dw = ts.eval_dw(t);
        let dtdw = ts.eval_dtdw(t);
        let h = 1e-6;
        for i in 0..2 {
            for j in 0..20 {
                let mut wp = ts.weights().clone();
                let mut wm = ts.weights().clone();
                wp[(i, j)] += h;
                wm[(i, j)] -= h;
                let p = TrialSolution::new(ts.z().to_vec(), wp, ts.basis().clone()).unwrap();
                let q = TrialSolution::new(ts.z().to_vec(), wm, ts.basis().clone()).unwrap();
                let fd = (p.eval(t)[i] - q.eval(t)[i]) / (2.0 * h);
                prop_assert!((fd - dw[(i, j)]).abs() <= 1e-8);
                let fd = (p.eval_dt(t)[i] - q.eval_dt(t)[i]) / (2.0 * h);
                prop_assert!((fd - dtdw[(i, j)]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn trajectories_are_continuous(seed in any::<u64>(), n in 1usize..30) {
        prop_assert_eq!(chain(seed, n).continuity_defect(), 0.0);
    }
}
