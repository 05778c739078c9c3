use super::sparse::{dot, norm2, CsrMatrix};
use crate::error::{Result, WgError};

/// Unpreconditioned conjugate gradients from a zero initial guess. Stops when
/// `|b - A x| <= tol |b|`.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(WgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(WgError::NotPositiveDefinite { pivot: 0, value: pap });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(WgError::MaxIterations {
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
    })
}
