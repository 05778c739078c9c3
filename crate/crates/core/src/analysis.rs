//! Error norms and convergence-rate extraction.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, WgError};
use crate::linalg::{dot, CsrMatrix, DenseMatrix, TripletBuilder};
use crate::polybasis::legendre_values;
use crate::solvers::ExactSolution;
use crate::wgspace::{WeakField, WgSpace};

/// `eⁿ = U - Q_h u(·, t)`.
pub fn error_field(space: &WgSpace, u: &WeakField, exact: &ExactSolution, t: f64) -> Result<WeakField> {
    let f = |p: crate::mesh::Point| (exact.u)(p, t);
    let q = space.interpolate(&f)?;
    if q.len() != u.len() {
        return Err(WgError::DimensionMismatch {
            expected: q.len(),
            found: u.len(),
        });
    }
    Ok(u.sub(&q))
}

/// `|||v||| = sqrt(𝒜(v, v))`.
pub fn triple_bar_norm(values: &[f64], stiffness: &CsrMatrix) -> Result<f64> {
    let q = stiffness.quadratic_form(values);
    if q < 0.0 {
        let scale = stiffness.max_abs() * dot(values, values);
        if q < -1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(WgError::Internal(format!("negative energy {q:e}")));
        }
        return Ok(0.0);
    }
    Ok(q.sqrt())
}

/// `‖v₀‖_{L²(Ω)}` through the assembled interior mass matrix.
pub fn l2_norm(values: &[f64], mass: &CsrMatrix) -> f64 {
    mass.quadratic_form(values).max(0.0).sqrt()
}

/// `‖v₀‖_{L²(Ω)}` by direct quadrature of `v₀²`.
pub fn l2_norm_by_quadrature(space: &WgSpace, values: &[f64]) -> f64 {
    let mut total = 0.0;
    for t in 0..space.num_elements() {
        for (p, w) in space.frame(t).quadrature(&space.rules().triangle) {
            total += w * space.eval_interior(t, values, p).powi(2);
        }
    }
    total.sqrt()
}

/// `‖v‖₁,ₕ = (Σ_K ‖∇v₀‖²_K + h_K⁻¹ ‖v₀ - v_b‖²_∂K)^{1/2}`.
pub fn h1_seminorm(space: &WgSpace, values: &[f64]) -> f64 {
    (0..space.num_elements())
        .map(|t| h1_element_squared(space, t, &space.gather(t, values)))
        .sum::<f64>()
        .sqrt()
}

/// Contribution of one element to `‖v‖²₁,ₕ` from its local coefficients.
pub fn h1_element_squared(space: &WgSpace, t: usize, local: &[f64]) -> f64 {
    let cfg = space.config();
    let nk = space.dofs().dim_interior;
    let ne = cfg.j + 1;
    let frame = space.frame(t);
    let basis = frame.basis(cfg.k);
    let (mut v, mut g) = (vec![0.0; nk], vec![[0.0; 2]; nk]);
    let mut total = 0.0;
    for (p, w) in frame.quadrature(&space.rules().triangle) {
        basis.eval_into(p, &mut v, &mut g);
        let gx: f64 = (0..nk).map(|i| g[i][0] * local[i]).sum();
        let gy: f64 = (0..nk).map(|i| g[i][1] * local[i]).sum();
        total += w * (gx * gx + gy * gy);
    }
    for i in 0..3 {
        let vb = &local[nk + i * ne..nk + (i + 1) * ne];
        for (p, w, s) in frame.edge_quadrature(i, &space.rules().edge) {
            basis.values_into(p, &mut v);
            let v0: f64 = (0..nk).map(|q| v[q] * local[q]).sum();
            let b: f64 = legendre_values(cfg.j, s).iter().zip(vb).map(|(l, c)| l * c).sum();
            total += w * (v0 - b).powi(2) / frame.h_k;
        }
    }
    total
}

/// Local Gram matrix of `‖·‖²₁,ₕ` in the `[interior, edge0, edge1, edge2]`
/// layout.
pub fn h1_element_gram(space: &WgSpace, t: usize) -> DenseMatrix {
    let cfg = space.config();
    let nk = space.dofs().dim_interior;
    let ne = cfg.j + 1;
    let dim = nk + 3 * ne;
    let frame = space.frame(t);
    let basis = frame.basis(cfg.k);
    let mut gram = DenseMatrix::zeros(dim, dim);
    let g = gram.as_mut_slice();
    let (mut v, mut d) = (vec![0.0; nk], vec![[0.0; 2]; nk]);
    for (p, w) in frame.quadrature(&space.rules().triangle) {
        basis.eval_into(p, &mut v, &mut d);
        for a in 0..nk {
            for b in 0..nk {
                g[a * dim + b] += w * (d[a][0] * d[b][0] + d[a][1] * d[b][1]);
            }
        }
    }
    let mut jump = vec![0.0; dim];
    for i in 0..3 {
        for (p, w, s) in frame.edge_quadrature(i, &space.rules().edge) {
            basis.values_into(p, &mut v);
            jump.iter_mut().for_each(|x| *x = 0.0);
            jump[..nk].iter_mut().zip(&v).for_each(|(x, y)| *x = -y);
            for (r, l) in legendre_values(cfg.j, s).into_iter().enumerate() {
                jump[nk + i * ne + r] = l;
            }
            let scale = w / frame.h_k;
            for a in 0..dim {
                if jump[a] != 0.0 {
                    for b in 0..dim {
                        g[a * dim + b] += scale * jump[a] * jump[b];
                    }
                }
            }
        }
    }
    gram
}

/// Global Gram matrix of `‖·‖²₁,ₕ` on the free degrees of freedom.
pub fn assemble_h1_gram(space: &WgSpace) -> CsrMatrix {
    let mut builder = TripletBuilder::new(space.dim());
    for t in 0..space.num_elements() {
        let map = space.local_map(t);
        let gram = h1_element_gram(space, t);
        for (a, ga) in map.iter().enumerate() {
            let Some(ga) = *ga else { continue };
            for (b, gb) in map.iter().enumerate() {
                if let Some(gb) = *gb {
                    builder.push(ga, gb, gram.row(a)[b]);
                }
            }
        }
    }
    builder.build(true)
}

/// Classification of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    /// The discrete system lost positive definiteness.
    NiUnstable,
    /// Solves succeeded but the errors stopped decreasing.
    NiInconsistent,
}

impl Status {
    pub fn is_ni(self) -> bool {
        !matches!(self, Status::Converged)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::NiUnstable => "NI_unstable",
            Status::NiInconsistent => "NI_inconsistent",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Status::Converged),
            "NI_unstable" => Ok(Status::NiUnstable),
            "NI_inconsistent" => Ok(Status::NiInconsistent),
            other => Err(WgError::Config(format!("unknown status '{other}'"))),
        }
    }
}

/// Errors at `T` for one mesh level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub h_label: f64,
    pub tau: f64,
    pub triple_bar_error: Option<f64>,
    pub triple_bar_order: Option<f64>,
    pub l2_error: Option<f64>,
    pub l2_order: Option<f64>,
    pub status: Status,
}

impl ConvergenceRecord {
    pub fn new(h_label: f64, tau: f64, triple_bar_error: f64, l2_error: f64) -> Self {
        ConvergenceRecord {
            h_label,
            tau,
            triple_bar_error: Some(triple_bar_error),
            triple_bar_order: None,
            l2_error: Some(l2_error),
            l2_order: None,
            status: Status::Converged,
        }
    }

    /// A level whose solve failed.
    pub fn failed(h_label: f64, tau: f64, status: Status) -> Self {
        ConvergenceRecord {
            h_label,
            tau,
            triple_bar_error: None,
            triple_bar_order: None,
            l2_error: None,
            l2_order: None,
            status,
        }
    }
}

/// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`; `None` unless both
/// errors are positive and finite.
pub fn order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Option<f64> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    if ok(e_coarse) && ok(e_fine) && h_coarse > h_fine && h_fine > 0.0 {
        Some((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln())
    } else {
        None
    }
}

/// Fills the order columns from the second row on (rows ascending in `n`).
pub fn observed_orders(records: &mut [ConvergenceRecord]) {
    for i in 0..records.len() {
        let (tb, l2) = if i == 0 {
            (None, None)
        } else {
            let (c, f) = (&records[i - 1], &records[i]);
            let pick = |a: Option<f64>, b: Option<f64>| a.zip(b).and_then(|(a, b)| order(a, b, c.h_label, f.h_label));
            (pick(c.triple_bar_error, f.triple_bar_error), pick(c.l2_error, f.l2_error))
        };
        records[i].triple_bar_order = tb;
        records[i].l2_order = l2;
    }
}

/// Ratio of finest to next-finest error at or above which a table is
/// classified as not consistent.
pub const INCONSISTENT_RATIO: f64 = 0.9;

/// Table status: unstable if any level failed, inconsistent if either error
/// fails to decrease across the two finest levels.
pub fn classify(records: &[ConvergenceRecord]) -> Status {
    if records.iter().any(|r| r.status == Status::NiUnstable) {
        return Status::NiUnstable;
    }
    if records.iter().any(|r| r.status == Status::NiInconsistent) {
        return Status::NiInconsistent;
    }
    if let [.., c, f] = records {
        let stalled = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => !(b < INCONSISTENT_RATIO * a),
            _ => true,
        };
        if stalled(c.triple_bar_error, f.triple_bar_error) || stalled(c.l2_error, f.l2_error) {
            return Status::NiInconsistent;
        }
    }
    Status::Converged
}

/// Fills orders, classifies the table and stamps the status on every row.
pub fn finalize_table(records: &mut [ConvergenceRecord]) -> Status {
    observed_orders(records);
    let status = classify(records);
    for r in records.iter_mut() {
        r.status = status;
    }
    status
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_mass, assemble_stiffness, assemble_stiffness_parts};
    use crate::mesh::build_uniform_square_mesh;
    use crate::solvers::ParabolicProblem;
    use crate::wgspace::{Coefficient, Stabilizer, WgConfig};
    use std::f64::consts::PI;

    fn space(n: usize, k: usize, j: usize, l: usize) -> WgSpace {
        WgSpace::new(build_uniform_square_mesh(n).unwrap(), WgConfig::new(k, j, l, Stabilizer::Projected).unwrap()).unwrap()
    }

    #[test]
    fn projected_exact_solution_has_zero_error() {
        let s = space(4, 2, 1, 1);
        let exact = ParabolicProblem::paper_sec5().exact.unwrap();
        let u = s.interpolate(&|p| (exact.u)(p, 0.5)).unwrap();
        let e = error_field(&s, &u, &exact, 0.5).unwrap();
        assert!(e.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn triple_bar_examples() {
        let s = space(3, 2, 2, 2);
        let a = assemble_stiffness(&s, &Coefficient::Identity).unwrap();
        assert_eq!(triple_bar_norm(&vec![0.0; s.dim()], &a).unwrap(), 0.0);
        let v = s.interpolate(&|p| (PI * p[0]).sin() * p[1] * (1.0 - p[1])).unwrap();
        let n1 = triple_bar_norm(v.values(), &a).unwrap();
        let v2: Vec<f64> = v.values().iter().map(|x| 2.0 * x).collect();
        assert!((triple_bar_norm(&v2, &a).unwrap() - 2.0 * n1).abs() < 1e-12 * n1);
        let (k, st) = assemble_stiffness_parts(&s, &Coefficient::Identity).unwrap();
        let split = k.quadratic_form(v.values()) + st.quadratic_form(v.values());
        assert!((n1 * n1 - split).abs() <= 1e-12 * split);
    }

    #[test]
    fn l2_norm_examples() {
        let s = space(4, 2, 1, 1);
        let m = assemble_mass(&s);
        assert_eq!(l2_norm(&vec![0.0; s.dim()], &m), 0.0);
        let one = s.interpolate(&|_| 1.0).unwrap();
        assert!((l2_norm(one.values(), &m) - 1.0).abs() < 1e-12);
        let v = s.interpolate(&|p| (PI * p[0]).sin() * (PI * p[1]).sin()).unwrap();
        let by_mass = l2_norm(v.values(), &m);
        assert!((by_mass - l2_norm_by_quadrature(&s, v.values())).abs() < 1e-12);
        let fine = space(16, 2, 1, 1);
        let vf = fine.interpolate(&|p| (PI * p[0]).sin() * (PI * p[1]).sin()).unwrap();
        assert!((l2_norm(vf.values(), &assemble_mass(&fine)) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn h1_seminorm_examples() {
        let s = space(2, 2, 1, 1);
        let constant = s.interpolate_local(3, &|_| 1.0).unwrap();
        assert!(h1_element_squared(&s, 3, &constant) < 1e-24);
        let s = space(2, 1, 1, 1);
        let linear = s.interpolate_local(5, &|p| p[0]).unwrap();
        let area = s.frame(5).area;
        assert!((h1_element_squared(&s, 5, &linear).sqrt() - area.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn energy_is_equivalent_to_discrete_h1() {
        let s = space(4, 2, 2, 2);
        let a = assemble_stiffness(&s, &Coefficient::Identity).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for seed in 0..100u64 {
            let v: Vec<f64> = (0..s.dim()).map(|i| ((i as f64 + 1.0) * (seed as f64 + 0.37) * 12.9898).sin()).collect();
            let r = a.quadratic_form(&v) / h1_seminorm(&s, &v).powi(2);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        assert!(lo > 0.0 && hi.is_finite(), "[{lo}, {hi}]");
    }

    #[test]
    fn gram_matrix_reproduces_seminorm() {
        let s = space(4, 3, 2, 2);
        let gram = assemble_h1_gram(&s);
        assert!(gram.asymmetry() <= 1e-14 * gram.max_abs());
        for seed in 0..5u64 {
            let v: Vec<f64> = (0..s.dim()).map(|i| ((i as f64 + 0.5) * (seed as f64 + 1.7) * 4.1414).cos()).collect();
            let direct = h1_seminorm(&s, &v).powi(2);
            assert!((gram.quadratic_form(&v) - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn orders_from_errors() {
        let mut rows = vec![
            ConvergenceRecord::new(0.25, 1e-3, 4.0, 4.0),
            ConvergenceRecord::new(0.125, 1e-3, 1.0, 0.5),
        ];
        observed_orders(&mut rows);
        assert_eq!(rows[0].triple_bar_order, None);
        assert!((rows[1].triple_bar_order.unwrap() - 2.0).abs() < 1e-15);
        assert!((rows[1].l2_order.unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn reference_order_is_reproduced_from_reference_errors() {
        let o = order(7.169166e-02, 1.805445e-02, 0.25, 0.125).unwrap();
        assert!((o - 1.989451).abs() < 1e-6);
        let o = order(6.189540e-03, 7.725189e-04, 0.25, 0.125).unwrap();
        assert!((o - 3.002190).abs() < 1e-6);
    }

    #[test]
    fn stalled_errors_are_inconsistent() {
        let mut rows = vec![
            ConvergenceRecord::new(0.25, 1e-3, 1e-2, 1e-2),
            ConvergenceRecord::new(0.125, 1e-3, 9.5e-3, 9.5e-3),
        ];
        assert_eq!(finalize_table(&mut rows), Status::NiInconsistent);
        assert!(rows.iter().all(|r| r.status == Status::NiInconsistent));
    }

    #[test]
    fn failed_level_is_unstable() {
        let rows = vec![
            ConvergenceRecord::new(0.25, 1e-3, 1e-2, 1e-2),
            ConvergenceRecord::failed(0.125, 1e-3, Status::NiUnstable),
        ];
        assert_eq!(classify(&rows), Status::NiUnstable);
    }

    #[test]
    fn non_positive_error_has_no_order() {
        assert_eq!(order(0.0, 1.0, 0.5, 0.25), None);
        assert_eq!(order(1.0, -1.0, 0.5, 0.25), None);
    }
}
