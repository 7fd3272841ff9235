use nalgebra::DMatrix;
use pirpnn_core::linalg::{
    factorize_pinv, pinv_solve, sparse_min2norm_solve, ColumnOrder, SparseMatrix, SparseQr,
    SparseQrOptions,
};
use pirpnn_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn residual_norm(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    let ax = a * nalgebra::DVector::from_column_slice(x);
    ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
    norm(&d) / norm(y).max(1.0)
}

/// Sparse random matrix with an optional block of repeated columns.
fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64, repeats: usize) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(m, n, |_, _| {
        if rng.random::<f64>() < density {
            rng.random::<f64>() * 2.0 - 1.0
        } else {
            0.0
        }
    });
    for _ in 0..repeats.min(n.saturating_sub(1)) {
        let src = rng.random_range(0..n);
        let dst = rng.random_range(0..n);
        if src != dst {
            let scale = rng.random::<f64>() + 0.5;
            let col = a.column(src) * scale;
            a.set_column(dst, &col);
        }
    }
    a
}

#[test]
fn identity_passes_through() {
    let x = pinv_solve(&DMatrix::identity(3, 3), &[1.0, 2.0, 3.0], None).unwrap();
    assert_eq!(x, vec![1.0, 2.0, 3.0]);
}

#[test]
fn tiny_singular_value_is_truncated() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-30]));
    let x = pinv_solve(&a, &[1.0, 1.0], None).unwrap();
    assert_eq!(x, vec![1.0, 0.0]);
}

#[test]
fn rank_one_gives_minimum_norm() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let x = pinv_solve(&a, &[2.0, 2.0], None).unwrap();
    // normal equations restricted to range(Aᵀ) = span{(1,1)}: x = s(1,1), 4s = 4
    for v in &x {
        assert!((v - 1.0).abs() < 1e-14, "{x:?}");
    }
}

#[test]
fn factorization_is_reusable() {
    let f = factorize_pinv(&DMatrix::identity(2, 2), None).unwrap();
    assert_eq!(f.apply(&[5.0, 7.0]).unwrap(), vec![5.0, 7.0]);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 4.0]));
    let f = factorize_pinv(&d, None).unwrap();
    let x = f.apply(&[2.0, 4.0]).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
}

#[test]
fn factorization_matches_one_shot_on_rank_deficient() {
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, -1.0, -2.0]);
    let f = factorize_pinv(&a, None).unwrap();
    assert_eq!(f.rank(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let b: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
        let x1 = f.apply(&b).unwrap();
        let x2 = pinv_solve(&a, &b, None).unwrap();
        assert!(rel_diff(&x1, &x2) < 1e-14);
    }
}

#[test]
fn retained_factors_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_sparse(&mut rng, 12, 9, 0.6, 2);
    let f = factorize_pinv(&a, None).unwrap();
    let r = f.rank();
    let utu = f.u().transpose() * f.u();
    let vtv = f.v().transpose() * f.v();
    assert!((utu - DMatrix::identity(r, r)).amax() < 1e-10);
    assert!((vtv - DMatrix::identity(r, r)).amax() < 1e-10);
    assert!(f.sigma().iter().all(|&s| s > f.threshold()));
}

#[test]
fn dense_errors() {
    let a = DMatrix::identity(2, 2);
    assert!(matches!(pinv_solve(&a, &[1.0], None), Err(Error::Contract(_))));
    assert!(matches!(pinv_solve(&a, &[1.0, f64::NAN], None), Err(Error::Input(_))));
    let bad = DMatrix::from_row_slice(1, 2, &[1.0, f64::INFINITY]);
    assert!(matches!(pinv_solve(&bad, &[1.0], None), Err(Error::Input(_))));
}

#[test]
fn sparse_identity_and_split() {
    let i4 = SparseMatrix::from_triplets(4, 4, &(0..4).map(|k| (k, k, 1.0)).collect::<Vec<_>>()).unwrap();
    assert_eq!(sparse_min2norm_solve(&i4, &[0.0, 1.0, 0.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    let row = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
    let x = sparse_min2norm_solve(&row, &[2.0]).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15, "{x:?}");
}

#[test]
fn sparse_empty_is_an_input_error() {
    let a = SparseMatrix::from_triplets(3, 3, &[]).unwrap();
    assert!(matches!(sparse_min2norm_solve(&a, &[1.0; 3]), Err(Error::Input(_))));
}

#[test]
fn sparse_random_40x30_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let a = random_sparse(&mut rng, 40, 30, 0.15, 0);
    let b: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
    let s = SparseMatrix::from_dense(&a).unwrap();
    let x = sparse_min2norm_solve(&s, &b).unwrap();
    let y = pinv_solve(&a, &b, None).unwrap();
    assert!(rel_diff(&x, &y) <= 1e-8, "{}", rel_diff(&x, &y));
}

#[test]
fn sparse_orderings_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let a = random_sparse(&mut rng, 35, 35, 0.1, 5);
    let b: Vec<f64> = (0..35).map(|_| rng.random::<f64>()).collect();
    let s = SparseMatrix::from_dense(&a).unwrap();
    let solve = |ordering| {
        SparseQr::factorize(&s, &SparseQrOptions { ordering, ..Default::default() })
            .unwrap()
            .solve(&b)
            .unwrap()
    };
    let x = solve(ColumnOrder::Natural);
    let y = solve(ColumnOrder::Bandwidth);
    assert!(rel_diff(&x, &y) < 1e-10);
}

#[test]
fn regularization_matches_stacked_dense_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_sparse(&mut rng, 10, 8, 0.4, 2);
    let b: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
    let lambda = 0.3;
    let s = SparseMatrix::from_dense(&a).unwrap();
    let opts = SparseQrOptions { regularization: lambda, ..Default::default() };
    let x = SparseQr::factorize(&s, &opts).unwrap().solve(&b).unwrap();
    let mut stacked = DMatrix::zeros(18, 8);
    stacked.view_mut((0, 0), (10, 8)).copy_from(&a);
    for j in 0..8 {
        stacked[(10 + j, j)] = lambda;
    }
    let mut bb = b.clone();
    bb.resize(18, 0.0);
    let y = pinv_solve(&stacked, &bb, None).unwrap();
    assert!(rel_diff(&x, &y) < 1e-10);
}

#[test]
fn sparse_rank_detection() {
    let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 1.0, 0.0, 0.0, 1.0]);
    let qr = SparseQr::factorize(&SparseMatrix::from_dense(&a).unwrap(), &SparseQrOptions::default()).unwrap();
    assert_eq!(qr.rank(), 2);
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = (DMatrix<f64>, Vec<f64>)> {
    (1..=max, 1..=max, any::<u64>(), 0.05f64..1.0, 0usize..4).prop_map(|(m, n, seed, density, repeats)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_sparse(&mut rng, m, n, density, repeats);
        if a.iter().all(|&v| v == 0.0) {
            a[(rng.random_range(0..m), rng.random_range(0..n))] = 1.0;
        }
        let b = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        (a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pinv_is_least_squares_optimal((a, b) in matrix_strategy(12), seed in any::<u64>()) {
        let x = pinv_solve(&a, &b, None).unwrap();
        let best = residual_norm(&a, &x, &b);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let cand: Vec<f64> = x.iter().map(|v| v + (rng.random::<f64>() - 0.5) * 2.0).collect();
            prop_assert!(best <= residual_norm(&a, &cand, &b) * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn pinv_is_orthogonal_to_null_space((a, b) in matrix_strategy(10)) {
        let x = pinv_solve(&a, &b, None).unwrap();
        let (m, n) = a.shape();
        let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
        let svd = fa.svd().unwrap();
        let (v, s) = (svd.V(), svd.S().column_vector());
        let smax = (0..s.nrows()).map(|k| s[k]).fold(0.0, f64::max);
        let tol = m.max(n) as f64 * f64::EPSILON * smax;
        // right singular vectors past the numerical rank span the null space
        let rank = (0..s.nrows()).filter(|&k| s[k] > tol).count();
        let mut proj = 0.0f64;
        for k in rank..n {
            let dot: f64 = (0..n).map(|i| v[(i, k)] * x[i]).sum();
            proj = proj.max(dot.abs());
        }
        let xv = nalgebra::DVector::from_column_slice(&x);
        prop_assert!(proj <= 1e-10 * (1.0 + xv.amax()), "projection {proj:e}");
    }

    #[test]
    fn sparse_agrees_with_pinv((a, b) in matrix_strategy(50)) {
        let s = SparseMatrix::from_dense(&a).unwrap();
        let x = sparse_min2norm_solve(&s, &b).unwrap();
        let y = pinv_solve(&a, &b, None).unwrap();
        prop_assert!(rel_diff(&x, &y) <= 1e-8, "rel diff {}", rel_diff(&x, &y));
    }
}
