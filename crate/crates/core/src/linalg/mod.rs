//! Least-squares solves for the Newton iterations: a truncated-SVD
//! pseudoinverse for dense Jacobians and a rank-revealing Givens QR for
//! sparse ones.

mod dense;
mod sparse;

pub use dense::{default_threshold, factorize_pinv, pinv_solve, TruncatedSvd};
pub use sparse::{
    sparse_min2norm_solve, ColumnOrder, SparseMatrix, SparseQr, SparseQrOptions,
};
