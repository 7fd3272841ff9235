use nalgebra::DMatrix;
use pirpnn_bench::{compute_errors, BenchError};
use proptest::prelude::*;

#[test]
fn identical_inputs_have_zero_error() {
    let a = DMatrix::from_fn(7, 3, |i, j| (i * 3 + j) as f64);
    for e in compute_errors(&a, &a).unwrap() {
        assert_eq!((e.l2, e.linf, e.mae), (0.0, 0.0, 0.0));
    }
}

#[test]
fn three_four_five() {
    let sol = DMatrix::from_column_slice(2, 1, &[4.0, 6.0]);
    let r = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
    let e = compute_errors(&sol, &r).unwrap()[0];
    assert_eq!((e.l2, e.linf, e.mae), (5.0, 4.0, 3.5));
}

#[test]
fn single_point() {
    let e = compute_errors(&DMatrix::from_element(1, 1, -2.0), &DMatrix::zeros(1, 1)).unwrap()[0];
    assert_eq!((e.l2, e.linf, e.mae), (2.0, 2.0, 2.0));
}

#[test]
fn grid_mismatch_is_a_contract_error() {
    let a = DMatrix::zeros(3, 2);
    assert!(matches!(compute_errors(&a, &DMatrix::zeros(4, 2)), Err(BenchError::Contract(_))));
    assert!(matches!(compute_errors(&a, &DMatrix::zeros(3, 1)), Err(BenchError::Contract(_))));
    assert!(matches!(compute_errors(&DMatrix::zeros(0, 2), &DMatrix::zeros(0, 2)), Err(BenchError::Contract(_))));
}

proptest! {
    #[test]
    fn norms_are_ordered(d in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let sol = DMatrix::from_column_slice(d.len(), 1, &d);
        let e = compute_errors(&sol, &DMatrix::zeros(d.len(), 1)).unwrap()[0];
        prop_assert!(e.mae >= 0.0);
        prop_assert!(e.mae <= e.linf);
        prop_assert!(e.linf <= e.l2 * (1.0 + 1e-15));
    }
}
