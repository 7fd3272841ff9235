use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, Error, Result};

/// Truncated singular value decomposition `A ≈ U Σ Vᵀ` keeping singular
/// values strictly above a threshold.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v: DMatrix<f64>,
    threshold: f64,
    rows: usize,
    cols: usize,
}

impl TruncatedSvd {
    /// Left singular vectors of the retained values (rows × r).
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Retained singular values, all greater than [`threshold`](Self::threshold).
    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    /// Right singular vectors of the retained values (cols × r).
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Numerical rank, i.e. the number of retained singular values.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Applies the pseudoinverse: `x = V Σ⁻¹ Uᵀ b`.
    pub fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.rows {
            return Err(Error::Contract(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.rows
            )));
        }
        ensure_finite(b, "right-hand side")?;
        let b = DVector::from_column_slice(b);
        let mut c = self.u.tr_mul(&b);
        for (ci, s) in c.iter_mut().zip(self.sigma.iter()) {
            *ci /= s;
        }
        Ok((&self.v * c).as_slice().to_vec())
    }
}

fn check_matrix(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Contract("matrix has an empty dimension".into()));
    }
    ensure_finite(a.as_slice(), "matrix")
}

/// Default truncation threshold `max(rows, cols) · ε · σ_max`.
pub fn default_threshold(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Computes a reusable truncated SVD of `a`. `eps = None` selects the
/// default threshold.
pub fn factorize_pinv(a: &DMatrix<f64>, eps: Option<f64>) -> Result<TruncatedSvd> {
    check_matrix(a)?;
    if let Some(e) = eps {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(Error::Input(format!("invalid truncation threshold {e}")));
        }
    }
    let (rows, cols) = a.shape();
    // nalgebra's bidiagonal SVD loses accuracy on exactly rank-deficient input
    let fa = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let svd = fa
        .thin_svd()
        .map_err(|e| Error::Input(format!("singular value decomposition failed: {e:?}")))?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let sigma_max = (0..s.nrows()).map(|k| s[k]).fold(0.0, f64::max);
    let threshold = eps.unwrap_or_else(|| default_threshold(rows, cols, sigma_max));

    let keep: Vec<usize> = (0..s.nrows()).filter(|&k| s[k] > threshold).collect();
    let r = keep.len();
    let uk = DMatrix::from_fn(rows, r, |i, d| u[(i, keep[d])]);
    let vk = DMatrix::from_fn(cols, r, |i, d| v[(i, keep[d])]);
    let sk = DVector::from_fn(r, |d, _| s[keep[d]]);
    Ok(TruncatedSvd {
        u: uk,
        sigma: sk,
        v: vk,
        threshold,
        rows,
        cols,
    })
}

/// Minimum-norm least-squares solve through the truncated pseudoinverse.
pub fn pinv_solve(a: &DMatrix<f64>, b: &[f64], eps: Option<f64>) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::Contract(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            a.nrows()
        )));
    }
    factorize_pinv(a, eps)?.apply(b)
}
