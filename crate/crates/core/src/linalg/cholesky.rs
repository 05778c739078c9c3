//! Up-looking sparse Cholesky factorization with an elimination-tree
//! symbolic phase.

use super::ordering::{compute_ordering, Ordering};
use super::sparse::{norm2, CsrMatrix};
use crate::error::{Result, WgError};

const NONE: usize = usize::MAX;

/// A pivot smaller than this fraction of its original diagonal entry is
/// treated as a loss of positive definiteness.
pub const PIVOT_RELATIVE_TOL: f64 = 1e-9;

/// `P A Pᵀ = L Lᵀ`, reusable for any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<f64>,
    min_pivot_ratio: f64,
}

pub fn factorize(a: &CsrMatrix) -> Result<Factorization> {
    factorize_with(a, Ordering::default())
}

pub fn factorize_with(a: &CsrMatrix, ordering: Ordering) -> Result<Factorization> {
    if !a.is_symmetric() {
        return Err(WgError::Config("Cholesky requires a symmetric operator".into()));
    }
    let n = a.dim();
    if n >= u32::MAX as usize {
        return Err(WgError::Config(format!("operator of dimension {n} is too large")));
    }
    let perm = compute_ordering(a, ordering);
    let c = a.permute_symmetric(&perm);

    let parent = etree(&c);

    // column counts of L from the row patterns
    let mut counts = vec![1usize; n];
    let mut stack = vec![0usize; n];
    let mut mark = vec![NONE; n];
    for k in 0..n {
        let top = ereach(&c, k, &parent, &mut stack, &mut mark);
        for &i in &stack[top..] {
            counts[i] += 1;
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + counts[k];
    }
    let nnz = lp[n];
    let mut li = vec![0u32; nnz];
    let mut lx = vec![0.0; nnz];
    let mut next: Vec<usize> = lp[..n].to_vec();
    let mut x = vec![0.0; n];
    mark.iter_mut().for_each(|m| *m = NONE);
    let mut min_pivot_ratio = f64::INFINITY;

    for k in 0..n {
        let top = ereach(&c, k, &parent, &mut stack, &mut mark);
        let mut ckk = 0.0;
        for (i, v) in c.row(k) {
            if i < k {
                x[i] = v;
            } else if i == k {
                ckk = v;
            }
        }
        let mut d = ckk;
        for &i in &stack[top..] {
            let lki = x[i] / lx[lp[i]];
            x[i] = 0.0;
            for p in (lp[i] + 1)..next[i] {
                x[li[p] as usize] -= lx[p] * lki;
            }
            d -= lki * lki;
            let p = next[i];
            li[p] = k as u32;
            lx[p] = lki;
            next[i] += 1;
        }
        let ratio = if ckk > 0.0 { d / ckk } else { f64::NEG_INFINITY };
        if !(d.is_finite() && ratio > PIVOT_RELATIVE_TOL) {
            return Err(WgError::NotPositiveDefinite {
                pivot: perm[k],
                value: d,
            });
        }
        min_pivot_ratio = min_pivot_ratio.min(ratio);
        let p = next[k];
        li[p] = k as u32;
        lx[p] = d.sqrt();
        next[k] += 1;
    }

    let factor = Factorization {
        n,
        perm,
        lp,
        li,
        lx,
        min_pivot_ratio,
    };
    #[cfg(debug_assertions)]
    factor.self_check(a);
    Ok(factor)
}

fn etree(c: &CsrMatrix) -> Vec<usize> {
    let n = c.dim();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for (mut i, _) in c.row(k) {
            while i != NONE && i < k {
                let inext = ancestor[i];
                ancestor[i] = k;
                if inext == NONE {
                    parent[i] = k;
                }
                i = inext;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal) in
/// topological order, written to `stack[top..]`.
fn ereach(c: &CsrMatrix, k: usize, parent: &[usize], stack: &mut [usize], mark: &mut [usize]) -> usize {
    let n = c.dim();
    let mut top = n;
    mark[k] = k;
    for (i, _) in c.row(k) {
        if i >= k {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while j != NONE && mark[j] != k {
            stack[len] = j;
            len += 1;
            mark[j] = k;
            j = parent[j];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.li.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Smallest `pivot / original diagonal` encountered.
    pub fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        let mut work = vec![0.0; self.n];
        self.solve_into(b, &mut x, &mut work);
        x
    }

    /// Solves `A x = b` using `work` as scratch (length `n`).
    pub fn solve_into(&self, b: &[f64], x: &mut [f64], work: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let y = work;
        for k in 0..n {
            y[k] = b[self.perm[k]];
        }
        for j in 0..n {
            let s = self.lp[j];
            let yj = y[j] / self.lx[s];
            y[j] = yj;
            for p in (s + 1)..self.lp[j + 1] {
                y[self.li[p] as usize] -= self.lx[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let s = self.lp[j];
            let mut acc = y[j];
            for p in (s + 1)..self.lp[j + 1] {
                acc -= self.lx[p] * y[self.li[p] as usize];
            }
            y[j] = acc / self.lx[s];
        }
        for k in 0..n {
            x[self.perm[k]] = y[k];
        }
    }

    /// Recovers a known solution once per factorization.
    #[cfg(debug_assertions)]
    fn self_check(&self, a: &CsrMatrix) {
        let expected: Vec<f64> = (0..self.n).map(|i| 1.0 + (i % 7) as f64 / 7.0).collect();
        let b = a.matvec(&expected);
        let x = self.solve(&b);
        let res = Self::residual(a, &x, &b);
        if res > 1e-10 {
            log::warn!("Cholesky self-check residual {res:e} exceeds 1e-10");
        }
    }

    /// Relative residual `|A x - b| / |b|` against a supplied operator.
    pub fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        norm2(&r) / norm2(b).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::TripletBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_spd(n: usize, density: f64, seed: u64) -> CsrMatrix {
        // A = Bᵀ B + I with sparse B
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bmat = vec![vec![0.0; n]; n];
        for row in bmat.iter_mut() {
            for v in row.iter_mut() {
                if rng.gen::<f64>() < density {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let mut t = TripletBuilder::new(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for row in &bmat {
                    s += row[i] * row[j];
                }
                if s != 0.0 {
                    t.push(i, j, s);
                }
            }
        }
        t.build(true)
    }

    #[test]
    fn identity_solve() {
        let a = CsrMatrix::identity(5);
        let f = factorize(&a).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        assert_eq!(f.solve(&b), b);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]], true);
        let x = factorize(&a).unwrap().solve(&[1.0, 1.0]);
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_residual() {
        let a = random_spd(50, 0.2, 7);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        for ord in [Ordering::Natural, Ordering::ReverseCuthillMcKee, Ordering::NestedDissection] {
            let x = factorize_with(&a, ord).unwrap().solve(&b);
            assert!(Factorization::residual(&a, &x, &b) <= 1e-10);
        }
    }

    #[test]
    fn detects_indefinite_pivot() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]], true);
        match factorize_with(&a, Ordering::Natural) {
            Err(WgError::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn detects_singular() {
        let a = CsrMatrix::from_dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]], true);
        assert!(factorize(&a).is_err());
    }

    #[test]
    fn rejects_unsymmetric_flag() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]], false);
        assert!(matches!(factorize(&a), Err(WgError::Config(_))));
    }
}
