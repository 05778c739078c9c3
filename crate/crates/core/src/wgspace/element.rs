//! Element-level weak Galerkin kernels: geometry frames, weak gradient,
//! stabilizers and local mass matrices.

use super::coefficient::{Coefficient, Tensor};
use super::config::{Stabilizer, WgConfig};
use crate::error::Result;
use crate::linalg::{DenseCholesky, DenseMatrix};
use crate::mesh::{Mesh, Point};
use crate::polybasis::{legendre_values, poly_dim, LineRule, TriBasis, TriangleRule};

/// One edge of a triangle traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEdge {
    pub edge: usize,
    /// `+1.0` when the counterclockwise direction agrees with the edge's
    /// global parametrization (lower to higher vertex index).
    pub sign: f64,
    pub start: Point,
    pub end: Point,
    pub length: f64,
    pub normal: Point,
}

impl LocalEdge {
    /// Point at local parameter `s in [-1, 1]` (start to end).
    pub fn point(&self, s: f64) -> Point {
        let w = 0.5 * (s + 1.0);
        [
            self.start[0] + w * (self.end[0] - self.start[0]),
            self.start[1] + w * (self.end[1] - self.start[1]),
        ]
    }

    /// Global Legendre parameter of local parameter `s`.
    pub fn global_t(&self, s: f64) -> f64 {
        self.sign * s
    }
}

/// Geometry of one triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFrame {
    pub triangle: usize,
    pub vertices: [Point; 3],
    pub area: f64,
    pub h_k: f64,
    pub centroid: Point,
    pub edges: [LocalEdge; 3],
}

impl ElementFrame {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let vertices = mesh.triangle_points(t);
        let edges = std::array::from_fn(|i| {
            let r = mesh.triangle_edges[t][i];
            LocalEdge {
                edge: r.edge,
                sign: f64::from(r.sign),
                start: vertices[i],
                end: vertices[(i + 1) % 3],
                length: mesh.edge_length(r.edge),
                normal: mesh.outward_normal(t, i),
            }
        });
        ElementFrame {
            triangle: t,
            vertices,
            area: mesh.signed_area(t).abs(),
            h_k: mesh.h_k[t],
            centroid: mesh.centroid(t),
            edges,
        }
    }

    /// Physical image of a reference-triangle point.
    pub fn map(&self, xi: [f64; 2]) -> Point {
        let [a, b, c] = self.vertices;
        [
            a[0] + (b[0] - a[0]) * xi[0] + (c[0] - a[0]) * xi[1],
            a[1] + (b[1] - a[1]) * xi[0] + (c[1] - a[1]) * xi[1],
        ]
    }

    /// Physical points and weights of a reference triangle rule.
    pub fn quadrature(&self, rule: &TriangleRule) -> Vec<(Point, f64)> {
        let jac = 2.0 * self.area;
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(xi, w)| (self.map(*xi), w * jac))
            .collect()
    }

    /// `(point, weight, global Legendre parameter)` on local edge `i`.
    pub fn edge_quadrature(&self, i: usize, rule: &LineRule) -> Vec<(Point, f64, f64)> {
        let e = &self.edges[i];
        let half = 0.5 * e.length;
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(s, w)| (e.point(s[0]), w * half, e.global_t(s[0])))
            .collect()
    }

    pub fn basis(&self, degree: usize) -> TriBasis {
        TriBasis::new(degree, self.centroid, self.h_k)
    }
}

/// Local pieces of the discrete bilinear form on one triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementOperators {
    /// Maps local weak coefficients to the coefficients of `∇_w v` in the
    /// component-major basis of `[P_l(K)]²`.
    pub weak_gradient: DenseMatrix,
    /// `(a ∇_w u, ∇_w v)_K`
    pub stiffness: DenseMatrix,
    pub stabilizer: DenseMatrix,
    /// `(u_0, v_0)_K`
    pub mass: DenseMatrix,
}

/// Precomputed rules shared by every element.
#[derive(Debug, Clone)]
pub struct ElementRules {
    pub triangle: TriangleRule,
    pub edge: LineRule,
}

/// Scalar mass matrix of a basis under a triangle rule.
pub fn mass_matrix(frame: &ElementFrame, basis: &TriBasis, rule: &TriangleRule) -> DenseMatrix {
    let n = basis.dim();
    let mut m = DenseMatrix::zeros(n, n);
    let mut v = vec![0.0; n];
    for (p, w) in frame.quadrature(rule) {
        basis.values_into(p, &mut v);
        for a in 0..n {
            let wa = w * v[a];
            for b in 0..=a {
                m[(a, b)] += wa * v[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            m[(b, a)] = m[(a, b)];
        }
    }
    m
}

/// Right-hand side of the weak-gradient definition
/// `(∇_w v, φ) = -(v_0, ∇·φ)_K + <v_b, φ·n>_∂K`, one row per vector basis
/// function `ψ_a e_c` (component-major) and one column per local coefficient.
pub fn weak_gradient_rhs(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules) -> DenseMatrix {
    let bk = frame.basis(cfg.k);
    let bl = frame.basis(cfg.l);
    let (nk, nl, ne) = (bk.dim(), bl.dim(), cfg.j + 1);
    let mut b = DenseMatrix::zeros(2 * nl, nk + 3 * ne);
    let mut qv = vec![0.0; nk];
    let mut pv = vec![0.0; nl];
    let mut pg = vec![[0.0; 2]; nl];
    for (p, w) in frame.quadrature(&rules.triangle) {
        bk.values_into(p, &mut qv);
        bl.eval_into(p, &mut pv, &mut pg);
        for c in 0..2 {
            for a in 0..nl {
                let wd = w * pg[a][c];
                for i in 0..nk {
                    b[(c * nl + a, i)] -= wd * qv[i];
                }
            }
        }
    }
    add_edge_trace_columns(cfg, frame, rules, &bl, &mut b);
    b
}

/// Same right-hand side assembled from the integrated-by-parts form
/// `(∇v_0, φ)_K + <v_b - v_0, φ·n>_∂K`. Agreement with
/// [`weak_gradient_rhs`] is a consistency check on the quadrature.
pub fn weak_gradient_rhs_by_parts(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules) -> DenseMatrix {
    let bk = frame.basis(cfg.k);
    let bl = frame.basis(cfg.l);
    let (nk, nl, ne) = (bk.dim(), bl.dim(), cfg.j + 1);
    let mut b = DenseMatrix::zeros(2 * nl, nk + 3 * ne);
    let mut qv = vec![0.0; nk];
    let mut qg = vec![[0.0; 2]; nk];
    let mut pv = vec![0.0; nl];
    for (p, w) in frame.quadrature(&rules.triangle) {
        bk.eval_into(p, &mut qv, &mut qg);
        bl.values_into(p, &mut pv);
        for c in 0..2 {
            for a in 0..nl {
                let wp = w * pv[a];
                for i in 0..nk {
                    b[(c * nl + a, i)] += wp * qg[i][c];
                }
            }
        }
    }
    for i in 0..3 {
        let n = frame.edges[i].normal;
        for (p, w, _) in frame.edge_quadrature(i, &rules.edge) {
            bk.values_into(p, &mut qv);
            bl.values_into(p, &mut pv);
            for c in 0..2 {
                for a in 0..nl {
                    let wp = w * pv[a] * n[c];
                    for q in 0..nk {
                        b[(c * nl + a, q)] -= wp * qv[q];
                    }
                }
            }
        }
    }
    add_edge_trace_columns(cfg, frame, rules, &bl, &mut b);
    b
}

fn add_edge_trace_columns(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules, bl: &TriBasis, b: &mut DenseMatrix) {
    let nk = poly_dim(cfg.k);
    let nl = bl.dim();
    let ne = cfg.j + 1;
    let mut pv = vec![0.0; nl];
    for i in 0..3 {
        let n = frame.edges[i].normal;
        let col0 = nk + i * ne;
        for (p, w, t) in frame.edge_quadrature(i, &rules.edge) {
            bl.values_into(p, &mut pv);
            let lv = legendre_values(cfg.j, t);
            for c in 0..2 {
                for a in 0..nl {
                    let wp = w * pv[a] * n[c];
                    for r in 0..ne {
                        b[(c * nl + a, col0 + r)] += wp * lv[r];
                    }
                }
            }
        }
    }
}

/// Solves `M_l G = B` componentwise.
pub fn solve_weak_gradient(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    let bl = frame.basis(cfg.l);
    let nl = bl.dim();
    let chol = DenseCholesky::new(&mass_matrix(frame, &bl, &rules.triangle))?;
    let cols = rhs.cols();
    let mut g = DenseMatrix::zeros(2 * nl, cols);
    let mut col = vec![0.0; nl];
    for c in 0..2 {
        for q in 0..cols {
            for a in 0..nl {
                col[a] = rhs[(c * nl + a, q)];
            }
            for (a, v) in chol.solve(&col).into_iter().enumerate() {
                g[(c * nl + a, q)] = v;
            }
        }
    }
    Ok(g)
}

/// `∫_K a_cd ψ_a ψ_b` for the component-major vector basis.
pub fn weighted_vector_mass(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules, a: &Coefficient) -> Result<DenseMatrix> {
    let bl = frame.basis(cfg.l);
    let nl = bl.dim();
    let mut m = DenseMatrix::zeros(2 * nl, 2 * nl);
    let mut pv = vec![0.0; nl];
    for (p, w) in frame.quadrature(&rules.triangle) {
        let t: Tensor = a.eval_checked(p)?;
        bl.values_into(p, &mut pv);
        for c in 0..2 {
            for d in 0..2 {
                if t[c][d] == 0.0 {
                    continue;
                }
                let wt = w * t[c][d];
                for x in 0..nl {
                    for y in 0..nl {
                        m[(c * nl + x, d * nl + y)] += wt * pv[x] * pv[y];
                    }
                }
            }
        }
    }
    m.symmetrize();
    Ok(m)
}

/// Values of `v_b - v_0` at the edge quadrature points of local edge `i`
/// as rows over the local coefficients.
fn discrepancy_rows(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules, bk: &TriBasis, i: usize) -> Vec<(f64, f64, Vec<f64>)> {
    let nk = bk.dim();
    let ne = cfg.j + 1;
    let nloc = nk + 3 * ne;
    let mut qv = vec![0.0; nk];
    frame
        .edge_quadrature(i, &rules.edge)
        .into_iter()
        .map(|(p, w, t)| {
            let mut row = vec![0.0; nloc];
            bk.values_into(p, &mut qv);
            for q in 0..nk {
                row[q] = -qv[q];
            }
            for (r, l) in legendre_values(cfg.j, t).into_iter().enumerate() {
                row[nk + i * ne + r] = l;
            }
            (w, t, row)
        })
        .collect()
}

/// Local stabilizer `h_K⁻¹ Σ_e <P(u_b - u_0), P(v_b - v_0)>_e` where `P` is
/// the identity (plain) or the L² projection onto `P_m(e)` (projected).
pub fn stabilizer_matrix(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules) -> DenseMatrix {
    let bk = frame.basis(cfg.k);
    let nloc = bk.dim() + 3 * (cfg.j + 1);
    let mut s = DenseMatrix::zeros(nloc, nloc);
    let inv_h = 1.0 / frame.h_k;
    for i in 0..3 {
        let rows = discrepancy_rows(cfg, frame, rules, &bk, i);
        match cfg.stabilizer {
            Stabilizer::Plain => {
                for (w, _, row) in &rows {
                    add_outer(&mut s, row, row, w * inv_h);
                }
            }
            Stabilizer::Projected => {
                let m = cfg.m();
                let len = frame.edges[i].length;
                // Legendre coefficients of the projected discrepancy
                let mut proj = vec![vec![0.0; nloc]; m + 1];
                for (w, t, row) in &rows {
                    let lv = legendre_values(m, *t);
                    for r in 0..=m {
                        let f = w * lv[r] * (2 * r + 1) as f64 / len;
                        for (pc, rc) in proj[r].iter_mut().zip(row) {
                            *pc += f * rc;
                        }
                    }
                }
                for (r, pr) in proj.iter().enumerate() {
                    add_outer(&mut s, pr, pr, inv_h * len / (2 * r + 1) as f64);
                }
            }
        }
    }
    s.symmetrize();
    s
}

fn add_outer(m: &mut DenseMatrix, u: &[f64], v: &[f64], scale: f64) {
    for (a, &ua) in u.iter().enumerate() {
        if ua == 0.0 {
            continue;
        }
        let f = scale * ua;
        for (b, &vb) in v.iter().enumerate() {
            m[(a, b)] += f * vb;
        }
    }
}

pub fn element_operators(cfg: &WgConfig, frame: &ElementFrame, rules: &ElementRules, a: &Coefficient) -> Result<ElementOperators> {
    let rhs = weak_gradient_rhs(cfg, frame, rules);
    let g = solve_weak_gradient(cfg, frame, rules, &rhs)?;
    let ma = weighted_vector_mass(cfg, frame, rules, a)?;
    let mut stiffness = g.tmatmul(&ma.matmul(&g));
    stiffness.symmetrize();
    let stabilizer = stabilizer_matrix(cfg, frame, rules);
    let mass = mass_matrix(frame, &frame.basis(cfg.k), &rules.triangle);
    Ok(ElementOperators {
        weak_gradient: g,
        stiffness,
        stabilizer,
        mass,
    })
}
