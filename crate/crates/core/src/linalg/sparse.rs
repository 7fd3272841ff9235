use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{ensure_finite, Error, Result};

/// Sparse matrix in compressed-column storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assembles a matrix from `(row, col, value)` triplets. Repeated
    /// positions are summed. Explicit zeros are kept as structural entries.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Contract("sparse matrix has an empty dimension".into()));
        }
        let mut counts = vec![0usize; cols + 1];
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::Contract(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite entry at ({r}, {c})")));
            }
            counts[c + 1] += 1;
        }
        for c in 0..cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rix = vec![0usize; triplets.len()];
        let mut val = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let p = next[c];
            rix[p] = r;
            val[p] = v;
            next[c] += 1;
        }

        // sort each column by row and merge duplicates
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for c in 0..cols {
            scratch.clear();
            scratch.extend((counts[c]..counts[c + 1]).map(|p| (rix[p], val[p])));
            scratch.sort_by_key(|e| e.0);
            for &(r, v) in &scratch {
                if row_idx.len() > col_ptr[c] && *row_idx.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds a matrix from compressed-column arrays. Row indices must be
    /// strictly increasing within each column.
    pub fn from_csc(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Contract("sparse matrix has an empty dimension".into()));
        }
        if col_ptr.len() != cols + 1
            || col_ptr[0] != 0
            || col_ptr[cols] != row_idx.len()
            || row_idx.len() != values.len()
            || col_ptr.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::Contract("malformed compressed-column arrays".into()));
        }
        for c in 0..cols {
            let r = &row_idx[col_ptr[c]..col_ptr[c + 1]];
            if r.windows(2).any(|w| w[0] >= w[1]) || r.last().is_some_and(|&x| x >= rows) {
                return Err(Error::Contract(format!("column {c} has unsorted or out-of-range rows")));
            }
        }
        ensure_finite(&values, "matrix")?;
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Converts a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let mut t = Vec::new();
        for c in 0..a.ncols() {
            for r in 0..a.nrows() {
                let v = a[(r, c)];
                if v != 0.0 {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows, self.cols);
        for c in 0..self.cols {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                a[(self.row_idx[p], c)] += self.values[p];
            }
        }
        a
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `c`.
    pub fn column(&self, c: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Contract(format!(
                "vector has length {}, expected {}",
                x.len(),
                self.cols
            )));
        }
        let mut y = vec![0.0; self.rows];
        for (c, &xc) in x.iter().enumerate() {
            let (ri, vi) = self.column(c);
            for (&r, &v) in ri.iter().zip(vi) {
                y[r] += v * xc;
            }
        }
        Ok(y)
    }

    /// Rows as sorted (column, value) lists.
    fn row_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for c in 0..self.cols {
            let (ri, vi) = self.column(c);
            for (&r, &v) in ri.iter().zip(vi) {
                rows[r].push((c, v));
            }
        }
        rows
    }
}

/// Column ordering applied before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnOrder {
    Natural,
    /// Breadth-first ordering over the row/column incidence graph, which
    /// keeps banded and block-banded patterns narrow.
    #[default]
    Bandwidth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseQrOptions {
    /// Rank tolerance on |R_kk|. `None` uses `20 (m + n) ε max_j ‖A_j‖`.
    pub tolerance: Option<f64>,
    /// Tikhonov weight λ; adds the rows `λ I` below `A`.
    pub regularization: f64,
    pub ordering: ColumnOrder,
}

impl Default for SparseQrOptions {
    fn default() -> Self {
        Self {
            tolerance: None,
            regularization: 0.0,
            ordering: ColumnOrder::Bandwidth,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Load(u32),
    Take(u32),
    Rot(u32, f64, f64),
    Store(u32),
    Discard,
}

/// Row-by-row Givens QR with an envelope-stored R factor and a replayable
/// record of the orthogonal transformation.
#[derive(Debug, Clone)]
struct GivensQr {
    n: usize,
    n_rows: usize,
    offset: Vec<usize>,
    last: Vec<usize>,
    data: Vec<f64>,
    filled: Vec<bool>,
    dead: Vec<bool>,
    ops: Vec<Op>,
}

impl GivensQr {
    /// `rows` hold sorted column indices in `0..n`.
    fn factor(n: usize, rows: &[Vec<(usize, f64)>], tol: f64) -> Self {
        let mut last_raw: Vec<usize> = (0..n).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let first_of = |r: &Vec<(usize, f64)>| r.first().map(|e| e.0).unwrap_or(usize::MAX);
        order.sort_by_key(|&r| first_of(&rows[r]));
        for r in rows {
            if let (Some(f), Some(l)) = (r.first(), r.last()) {
                last_raw[f.0] = last_raw[f.0].max(l.0);
            }
        }
        let mut last = vec![0usize; n];
        let mut offset = vec![0usize; n];
        let mut running = 0usize;
        let mut total = 0usize;
        for k in 0..n {
            running = running.max(last_raw[k]).max(k);
            last[k] = running;
            offset[k] = total;
            total += running - k + 1;
        }

        let mut qr = Self {
            n,
            n_rows: rows.len(),
            offset,
            last,
            data: vec![0.0; total],
            filled: vec![false; n],
            dead: vec![false; n],
            ops: Vec::new(),
        };

        let mut w = vec![0.0; n];
        let mut finalized = 0usize;
        for &r in &order {
            let row = &rows[r];
            let Some(&(f, _)) = row.first() else {
                qr.ops.push(Op::Load(r as u32));
                qr.ops.push(Op::Discard);
                continue;
            };
            while finalized < f {
                qr.finalize(finalized, tol, &mut w);
                finalized += 1;
            }
            qr.ops.push(Op::Load(r as u32));
            for &(c, v) in row {
                w[c] = v;
            }
            qr.eliminate(f, &mut w);
        }
        while finalized < n {
            qr.finalize(finalized, tol, &mut w);
            finalized += 1;
        }
        qr
    }

    fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let o = self.offset[k];
        let len = self.last[k] - k + 1;
        &mut self.data[o..o + len]
    }

    fn row(&self, k: usize) -> &[f64] {
        let o = self.offset[k];
        let len = self.last[k] - k + 1;
        &self.data[o..o + len]
    }

    /// Folds the working row `w` (zero before column `start`) into R.
    /// Leaves `w` zeroed.
    fn eliminate(&mut self, start: usize, w: &mut [f64]) {
        let mut k = start;
        loop {
            let end = self.last[k];
            let Some(off) = w[k..=end].iter().position(|&v| v != 0.0) else {
                self.ops.push(Op::Discard);
                return;
            };
            k += off;
            let end = self.last[k];
            if !self.filled[k] {
                let dst = self.row_mut(k);
                dst.copy_from_slice(&w[k..=end]);
                w[k..=end].iter_mut().for_each(|v| *v = 0.0);
                self.filled[k] = true;
                self.ops.push(Op::Store(k as u32));
                return;
            }
            let rk = self.row_mut(k);
            let a = rk[0];
            let b = w[k];
            let h = a.hypot(b);
            let (c, s) = (a / h, b / h);
            rk[0] = h;
            w[k] = 0.0;
            for (x, y) in rk[1..].iter_mut().zip(w[k + 1..=end].iter_mut()) {
                let (xv, yv) = (*x, *y);
                *x = c * xv + s * yv;
                *y = c * yv - s * xv;
            }
            self.ops.push(Op::Rot(k as u32, c, s));
            if k == end {
                self.ops.push(Op::Discard);
                return;
            }
            k += 1;
        }
    }

    fn finalize(&mut self, k: usize, tol: f64, w: &mut [f64]) {
        if !self.filled[k] {
            self.dead[k] = true;
            return;
        }
        if self.row(k)[0].abs() > tol {
            return;
        }
        self.dead[k] = true;
        self.filled[k] = false;
        self.ops.push(Op::Take(k as u32));
        let end = self.last[k];
        let o = self.offset[k];
        w[k + 1..=end].copy_from_slice(&self.data[o + 1..=o + end - k]);
        self.row_mut(k).iter_mut().for_each(|v| *v = 0.0);
        if k == end {
            self.ops.push(Op::Discard);
        } else {
            self.eliminate(k + 1, w);
        }
    }

    /// Applies Qᵀ to `b` and returns the leading n components.
    fn apply_qt(&self, b: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        let mut beta = 0.0;
        for op in &self.ops {
            match *op {
                Op::Load(r) => beta = b[r as usize],
                Op::Take(k) => {
                    beta = d[k as usize];
                    d[k as usize] = 0.0;
                }
                Op::Rot(k, c, s) => {
                    let dk = d[k as usize];
                    d[k as usize] = c * dk + s * beta;
                    beta = c * beta - s * dk;
                }
                Op::Store(k) => d[k as usize] = beta,
                Op::Discard => {}
            }
        }
        d
    }

    /// Applies Q to `[d; 0]` and returns a vector with one entry per input row.
    fn apply_q(&self, mut d: Vec<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        let mut beta = 0.0;
        for op in self.ops.iter().rev() {
            match *op {
                Op::Load(r) => out[r as usize] = beta,
                Op::Take(k) => d[k as usize] = beta,
                Op::Rot(k, c, s) => {
                    let dk = d[k as usize];
                    d[k as usize] = c * dk - s * beta;
                    beta = s * dk + c * beta;
                }
                Op::Store(k) => {
                    beta = d[k as usize];
                    d[k as usize] = 0.0;
                }
                Op::Discard => beta = 0.0,
            }
        }
        out
    }

    /// Solves R x = d by back substitution, with dead components set to 0.
    fn back_substitute(&self, d: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for k in (0..self.n).rev() {
            if self.dead[k] {
                continue;
            }
            let r = self.row(k);
            let mut s = d[k];
            for (rj, xj) in r[1..].iter().zip(&x[k + 1..=self.last[k]]) {
                s -= rj * xj;
            }
            x[k] = s / r[0];
        }
        x
    }

    /// Solves Rᵀ y = c by forward substitution, with dead components set to 0.
    fn forward_substitute_transposed(&self, c: &[f64]) -> Vec<f64> {
        let mut work = c.to_vec();
        let mut y = vec![0.0; self.n];
        for k in 0..self.n {
            if self.dead[k] {
                continue;
            }
            let r = self.row(k);
            let yk = work[k] / r[0];
            y[k] = yk;
            for (wj, rj) in work[k + 1..=self.last[k]].iter_mut().zip(&r[1..]) {
                *wj -= rj * yk;
            }
        }
        y
    }

    fn envelope_size(&self) -> usize {
        self.data.len()
    }
}

/// Rank-revealing sparse QR factorization for minimum-norm least squares.
#[derive(Debug, Clone)]
pub struct SparseQr {
    rows: usize,
    cols: usize,
    perm: Vec<usize>,
    stage1: GivensQr,
    /// QR of the transposed live rows of R, present only when rank deficient.
    stage2: Option<(GivensQr, Vec<usize>)>,
    tol: f64,
}

fn bandwidth_order(a: &SparseMatrix, rows: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let n = a.ncols();
    let degree: Vec<usize> = (0..n).map(|c| a.column(c).0.len()).collect();
    let mut col_seen = vec![false; n];
    let mut row_seen = vec![false; a.nrows()];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).filter(|&c| degree[c] > 0).collect();
    by_degree.sort_by_key(|&c| (degree[c], c));
    let mut queue = VecDeque::new();
    let mut fresh = Vec::new();
    for &seed in &by_degree {
        if col_seen[seed] {
            continue;
        }
        col_seen[seed] = true;
        order.push(seed);
        queue.push_back(seed);
        while let Some(c) = queue.pop_front() {
            for &r in a.column(c).0 {
                if row_seen[r] {
                    continue;
                }
                row_seen[r] = true;
                fresh.clear();
                fresh.extend(rows[r].iter().map(|e| e.0).filter(|&j| !col_seen[j]));
                fresh.sort_by_key(|&j| (degree[j], j));
                for &j in &fresh {
                    col_seen[j] = true;
                    order.push(j);
                    queue.push_back(j);
                }
            }
        }
    }
    order.extend((0..n).filter(|&c| degree[c] == 0));
    order
}

impl SparseQr {
    pub fn factorize(a: &SparseMatrix, opts: &SparseQrOptions) -> Result<Self> {
        if a.nnz() == 0 {
            return Err(Error::Input("matrix is structurally empty".into()));
        }
        ensure_finite(&a.values, "matrix")?;
        if !(opts.regularization >= 0.0) || !opts.regularization.is_finite() {
            return Err(Error::Input(format!(
                "invalid regularization {}",
                opts.regularization
            )));
        }
        let (m, n) = (a.nrows(), a.ncols());
        let mut rows = a.row_lists();
        let perm = match opts.ordering {
            ColumnOrder::Natural => (0..n).collect(),
            ColumnOrder::Bandwidth => bandwidth_order(a, &rows),
        };
        let mut inv = vec![0usize; n];
        for (p, &c) in perm.iter().enumerate() {
            inv[c] = p;
        }
        for row in rows.iter_mut() {
            for e in row.iter_mut() {
                e.0 = inv[e.0];
            }
            row.sort_by_key(|e| e.0);
        }
        if opts.regularization > 0.0 {
            rows.extend((0..n).map(|j| vec![(j, opts.regularization)]));
        }

        let col_norm = (0..n)
            .map(|c| a.column(c).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let tol = opts
            .tolerance
            .unwrap_or(20.0 * (m + n) as f64 * f64::EPSILON * col_norm);

        let stage1 = GivensQr::factor(n, &rows, tol);
        let stage2 = if stage1.dead.iter().any(|&d| d) {
            Some(Self::transposed_stage(&stage1))
        } else {
            None
        };
        Ok(Self {
            rows: m,
            cols: n,
            perm,
            stage1,
            stage2,
            tol,
        })
    }

    fn transposed_stage(r: &GivensQr) -> (GivensQr, Vec<usize>) {
        let live: Vec<usize> = (0..r.n).filter(|&k| !r.dead[k]).collect();
        let mut rows_t: Vec<Vec<(usize, f64)>> = vec![Vec::new(); r.n];
        let mut norm = 0.0f64;
        for (p, &k) in live.iter().enumerate() {
            let row = r.row(k);
            let mut s = 0.0;
            for (off, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    rows_t[k + off].push((p, v));
                    s += v * v;
                }
            }
            norm = norm.max(s.sqrt());
        }
        let tol = 20.0 * (r.n + live.len()) as f64 * f64::EPSILON * norm;
        (GivensQr::factor(live.len(), &rows_t, tol), live)
    }

    /// Number of columns judged linearly independent.
    pub fn rank(&self) -> usize {
        self.stage1.dead.iter().filter(|&&d| !d).count()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Stored entries of the R factor envelope.
    pub fn envelope_size(&self) -> usize {
        self.stage1.envelope_size()
    }

    /// Minimum-norm least-squares solution for right-hand side `b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.rows {
            return Err(Error::Contract(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.rows
            )));
        }
        ensure_finite(b, "right-hand side")?;
        let mut rhs = b.to_vec();
        rhs.resize(self.stage1.n_rows, 0.0);
        let d = self.stage1.apply_qt(&rhs);
        let xp = match &self.stage2 {
            None => self.stage1.back_substitute(&d),
            Some((q2, live)) => {
                let c: Vec<f64> = live.iter().map(|&k| d[k]).collect();
                let y = q2.forward_substitute_transposed(&c);
                q2.apply_q(y)
            }
        };
        let mut x = vec![0.0; self.cols];
        for (p, &c) in self.perm.iter().enumerate() {
            x[c] = xp[p];
        }
        Ok(x)
    }
}

/// Minimum-2-norm least-squares solve `A x ≈ b` with default options.
pub fn sparse_min2norm_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::Contract(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            a.nrows()
        )));
    }
    SparseQr::factorize(a, &SparseQrOptions::default())?.solve(b)
}
