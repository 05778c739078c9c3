//! Compressed sparse row storage for square operators.

use crate::error::{Result, WgError};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
    symmetric: bool,
}

/// Accumulates `(row, col, value)` contributions; duplicates are summed in
/// insertion order so the result is deterministic.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder {
            n,
            ..Default::default()
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        TripletBuilder {
            n,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn build(self, symmetric: bool) -> CsrMatrix {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &r in &self.rows {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let nnz = self.rows.len();
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        for k in 0..nnz {
            let r = self.rows[k];
            let p = next[r];
            cols[p] = self.cols[k];
            vals[p] = self.vals[k];
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut data = Vec::with_capacity(nnz);
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..n {
            let (s, e) = (counts[r], counts[r + 1]);
            order.clear();
            order.extend(s..e);
            // stable sort keeps summation order fixed
            order.sort_by_key(|&p| cols[p]);
            let mut last: Option<usize> = None;
            for &p in &order {
                if last == Some(cols[p]) {
                    *data.last_mut().unwrap() += vals[p];
                } else {
                    indices.push(cols[p]);
                    data.push(vals[p]);
                    last = Some(cols[p]);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            data,
            symmetric,
        }
    }
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>], symmetric: bool) -> Self {
        let n = rows.len();
        let mut b = TripletBuilder::new(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build(symmetric)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[s..e].iter().copied().zip(self.data[s..e].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[s..e].binary_search(&j) {
            Ok(p) => self.data[s + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (s, e) = (self.indptr[i], self.indptr[i + 1]);
            let mut acc = 0.0;
            for p in s..e {
                acc += self.data[p] * x[self.indices[p]];
            }
            *yi = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// `alpha A + beta B` over the union pattern.
    pub fn linear_combination(alpha: f64, a: &CsrMatrix, beta: f64, b: &CsrMatrix) -> Result<CsrMatrix> {
        if a.n != b.n {
            return Err(WgError::DimensionMismatch {
                expected: a.n,
                found: b.n,
            });
        }
        let mut builder = TripletBuilder::with_capacity(a.n, a.nnz() + b.nnz());
        for i in 0..a.n {
            for (j, v) in a.row(i) {
                builder.push(i, j, alpha * v);
            }
            for (j, v) in b.row(i) {
                builder.push(i, j, beta * v);
            }
        }
        Ok(builder.build(a.symmetric && b.symmetric))
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Symmetric permutation `P A Pᵀ` with `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix {
        let n = self.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut b = TripletBuilder::with_capacity(n, self.nnz());
        for (new_i, &old_i) in perm.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                b.push(new_i, inv[old_j], v);
            }
        }
        b.build(self.symmetric)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
