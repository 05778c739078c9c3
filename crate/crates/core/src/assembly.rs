//! Global sparse operators over the free degrees of freedom: the stiffness
//! form, the interior mass matrix, load vectors, and the consistency
//! functionals of the elliptic error equation.

use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{CsrMatrix, DenseMatrix, TripletBuilder};
use crate::mesh::Point;
use crate::polybasis::legendre_values;
use crate::wgspace::{apply, stabilizer_matrix, Coefficient, WgSpace};

/// `(f(·, t), v_0)` over the free degrees of freedom. Edge entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    pub values: Vec<f64>,
    pub time: f64,
}

fn scatter_matrices(space: &WgSpace, locals: &[DenseMatrix]) -> CsrMatrix {
    let n = space.dim();
    let nloc = space.dofs().local_dim();
    let mut b = TripletBuilder::with_capacity(n, locals.len() * nloc * nloc);
    for (t, m) in locals.iter().enumerate() {
        let map = space.local_map(t);
        for (a, ga) in map.iter().enumerate() {
            let Some(ga) = *ga else { continue };
            for (c, gc) in map.iter().enumerate() {
                if let Some(gc) = *gc {
                    b.push(ga, gc, m[(a, c)]);
                }
            }
        }
    }
    b.build(true)
}

fn scatter_vectors(space: &WgSpace, locals: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; space.dim()];
    for (t, v) in locals.iter().enumerate() {
        for (g, val) in space.local_map(t).into_iter().zip(v) {
            if let Some(g) = g {
                out[g] += val;
            }
        }
    }
    out
}

/// The gradient part `Σ_K (a ∇_w u, ∇_w v)_K` and the stabilizer part
/// assembled separately.
pub fn assemble_stiffness_parts(space: &WgSpace, a: &Coefficient) -> Result<(CsrMatrix, CsrMatrix)> {
    let ops: Vec<_> = (0..space.num_elements())
        .into_par_iter()
        .map(|t| space.element_operators(t, a))
        .collect::<Result<_>>()?;
    let k: Vec<DenseMatrix> = ops.iter().map(|o| o.stiffness.clone()).collect();
    let s: Vec<DenseMatrix> = ops.into_iter().map(|o| o.stabilizer).collect();
    Ok((scatter_matrices(space, &k), scatter_matrices(space, &s)))
}

/// The bilinear form `𝒜(u, v) = Σ_K (a ∇_w u, ∇_w v)_K + 𝒮(u, v)`.
pub fn assemble_stiffness(space: &WgSpace, a: &Coefficient) -> Result<CsrMatrix> {
    let locals: Vec<DenseMatrix> = (0..space.num_elements())
        .into_par_iter()
        .map(|t| {
            let ops = space.element_operators(t, a)?;
            let mut m = ops.stiffness;
            m.add_assign(&ops.stabilizer);
            Ok(m)
        })
        .collect::<Result<_>>()?;
    Ok(scatter_matrices(space, &locals))
}

/// `(u_0, v_0)`: block diagonal on interior coefficients, empty on edges.
pub fn assemble_mass(space: &WgSpace) -> CsrMatrix {
    let nk = space.dofs().dim_interior;
    let mut b = TripletBuilder::with_capacity(space.dim(), space.num_elements() * nk * nk);
    for t in 0..space.num_elements() {
        let frame = space.frame(t);
        let m = crate::wgspace::mass_matrix(frame, &frame.basis(space.config().k), &space.rules().triangle);
        let o = space.dofs().interior_offset(t);
        for a in 0..nk {
            for c in 0..nk {
                b.push(o + a, o + c, m[(a, c)]);
            }
        }
    }
    b.build(true)
}

/// `(f, v_0)` for a time-independent source.
pub fn assemble_spatial_load(space: &WgSpace, f: &(dyn Fn(Point) -> f64 + Sync)) -> Vec<f64> {
    let k = space.config().k;
    let nk = space.dofs().dim_interior;
    let locals: Vec<Vec<f64>> = (0..space.num_elements())
        .into_par_iter()
        .map(|t| {
            let frame = space.frame(t);
            let basis = frame.basis(k);
            let mut out = vec![0.0; nk];
            let mut v = vec![0.0; nk];
            for (p, w) in frame.quadrature(&space.data_rules().triangle) {
                let fw = w * f(p);
                basis.values_into(p, &mut v);
                for (o, b) in out.iter_mut().zip(&v) {
                    *o += fw * b;
                }
            }
            out
        })
        .collect();
    let mut out = vec![0.0; space.dim()];
    for (t, v) in locals.into_iter().enumerate() {
        let o = space.dofs().interior_offset(t);
        out[o..o + nk].copy_from_slice(&v);
    }
    out
}

/// `(f(·, t), v_0)`.
pub fn assemble_load(space: &WgSpace, f: &(dyn Fn(Point, f64) -> f64 + Sync), t: f64) -> LoadVector {
    LoadVector {
        values: assemble_spatial_load(space, &|p| f(p, t)),
        time: t,
    }
}

/// Functionals of the elliptic error equation for a smooth `v`, each
/// evaluated against every free test basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyForms {
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub l3: Vec<f64>,
    /// `𝒮(Q_h v, ·)`
    pub stabilizer: Vec<f64>,
}

impl ConsistencyForms {
    pub fn total(&self) -> Vec<f64> {
        (0..self.l1.len())
            .map(|i| self.l1[i] + self.l2[i] + self.l3[i] + self.stabilizer[i])
            .collect()
    }
}

/// Builds `l₁(v, ·)`, `l₂(v, ·)`, `l₃(v, ·)` and `𝒮(Q_h v, ·)` where, with
/// `r = 𝕼_l(a 𝕼_l ∇Q_k⁰ v) - a ∇v`,
/// `l₁ = Σ_K (r, ∇w_0)_K`, `l₂ = Σ_K <r·n, w_b - w_0>_∂K` and
/// `l₃ = Σ_K <Q_j^b v - Q_k⁰ v, 𝕼_l(a ∇_w w)·n>_∂K`.
pub fn assemble_consistency_forms(
    space: &WgSpace,
    a: &Coefficient,
    v: &(dyn Fn(Point) -> f64 + Sync),
    grad_v: &(dyn Fn(Point) -> [f64; 2] + Sync),
) -> Result<ConsistencyForms> {
    let locals: Vec<[Vec<f64>; 4]> = (0..space.num_elements())
        .into_par_iter()
        .map(|t| element_consistency(space, t, a, v, grad_v))
        .collect::<Result<_>>()?;
    let pick = |i: usize| -> Vec<f64> {
        let parts: Vec<Vec<f64>> = locals.iter().map(|l| l[i].clone()).collect();
        scatter_vectors(space, &parts)
    };
    Ok(ConsistencyForms {
        l1: pick(0),
        l2: pick(1),
        l3: pick(2),
        stabilizer: pick(3),
    })
}

fn eval_vector(basis: &crate::polybasis::TriBasis, coeffs: &[f64], p: Point) -> [f64; 2] {
    let nl = basis.dim();
    let vals = basis.values(p);
    let mut out = [0.0; 2];
    for c in 0..2 {
        out[c] = vals.iter().zip(&coeffs[c * nl..(c + 1) * nl]).map(|(x, y)| x * y).sum();
    }
    out
}

fn element_consistency(
    space: &WgSpace,
    t: usize,
    a: &Coefficient,
    v: &(dyn Fn(Point) -> f64 + Sync),
    grad_v: &(dyn Fn(Point) -> [f64; 2] + Sync),
) -> Result<[Vec<f64>; 4]> {
    let cfg = space.config();
    let frame = space.frame(t);
    let bk = frame.basis(cfg.k);
    let bl = frame.basis(cfg.l);
    let (nk, ne) = (bk.dim(), cfg.j + 1);
    let nloc = nk + 3 * ne;
    let data = space.data_rules();

    let qv = space.interpolate_local(t, v)?;
    let q0 = &qv[..nk];
    let eval_q0 = |p: Point| -> f64 { bk.values(p).iter().zip(q0).map(|(x, y)| x * y).sum() };
    let grad_q0 = |p: Point| -> [f64; 2] {
        let (_, g) = bk.eval(p);
        g.iter().zip(q0).fold([0.0; 2], |acc, (gi, c)| [acc[0] + gi[0] * c, acc[1] + gi[1] * c])
    };

    // q = 𝕼_l(a 𝕼_l ∇Q_k⁰ v)
    let s = space.project_vector(t, cfg.l, &grad_q0)?;
    let q = if a.is_identity() {
        s
    } else {
        space.project_vector(t, cfg.l, &|p| apply(&a.eval(p), eval_vector(&bl, &s, p)))?
    };
    let r = |p: Point| -> [f64; 2] {
        let qp = eval_vector(&bl, &q, p);
        let ag = apply(&a.eval(p), grad_v(p));
        [qp[0] - ag[0], qp[1] - ag[1]]
    };

    let mut l1 = vec![0.0; nloc];
    let mut g = vec![[0.0; 2]; nk];
    let mut vals = vec![0.0; nk];
    for (p, w) in frame.quadrature(&data.triangle) {
        let rp = r(p);
        bk.eval_into(p, &mut vals, &mut g);
        for i in 0..nk {
            l1[i] += w * (rp[0] * g[i][0] + rp[1] * g[i][1]);
        }
    }

    // columns of 𝕼_l(a ∇_w φ) for every local basis function φ
    let ops = space.element_operators(t, a)?;
    let grad_w = &ops.weak_gradient;
    let h = if a.is_identity() {
        grad_w.clone()
    } else {
        let mut h = DenseMatrix::zeros(grad_w.rows(), nloc);
        for col in 0..nloc {
            let coeffs = grad_w.column(col);
            let proj = space.project_vector(t, cfg.l, &|p| apply(&a.eval(p), eval_vector(&bl, &coeffs, p)))?;
            for (row, val) in proj.into_iter().enumerate() {
                h[(row, col)] = val;
            }
        }
        h
    };

    let mut l2 = vec![0.0; nloc];
    let mut l3 = vec![0.0; nloc];
    for i in 0..3 {
        let n = frame.edges[i].normal;
        let qb = &qv[nk + i * ne..nk + (i + 1) * ne];
        for (p, w, tp) in frame.edge_quadrature(i, &data.edge) {
            let lv = legendre_values(cfg.j, tp);
            bk.values_into(p, &mut vals);
            let rn = {
                let rp = r(p);
                rp[0] * n[0] + rp[1] * n[1]
            };
            // w_b - w_0 against each local basis function
            for q in 0..nk {
                l2[q] -= w * rn * vals[q];
            }
            for rr in 0..ne {
                l2[nk + i * ne + rr] += w * rn * lv[rr];
            }
            let jump = qb.iter().zip(&lv).map(|(c, l)| c * l).sum::<f64>() - eval_q0(p);
            let pl = bl.values(p);
            let nl = pl.len();
            for col in 0..nloc {
                let mut flux = 0.0;
                for c in 0..2 {
                    for (x, pv) in pl.iter().enumerate() {
                        flux += h[(c * nl + x, col)] * pv * n[c];
                    }
                }
                l3[col] += w * jump * flux;
            }
        }
    }

    let stab = stabilizer_matrix(cfg, frame, space.rules()).matvec(&qv);
    Ok([l1, l2, l3, stab])
}
