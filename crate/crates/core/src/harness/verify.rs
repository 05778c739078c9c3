//! Self-contained property checks; none of them needs reference data.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{assemble_h1_gram, l2_norm, triple_bar_norm};
use crate::assembly::{assemble_consistency_forms, assemble_spatial_load, assemble_stiffness};
use crate::error::{Result, WgError};
use crate::linalg::{cg_solve, dot, factorize, norm2, CsrMatrix, DenseMatrix, TripletBuilder};
use crate::mesh::{build_uniform_square_mesh, Point};
use crate::polybasis::{gauss_rule, legendre_values, triangle_rule, MAX_GAUSS_POINTS, MAX_TRIANGLE_EXACTNESS};
use crate::solvers::{InitialMode, MarchOptions, ParabolicProblem, ParabolicSolver, ScalarFn, Source, TimeGrid};
use crate::wgspace::{Coefficient, Stabilizer, WgConfig, WgSpace};

/// Outcome of one property: a detail line either way.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> Result<(bool, String)>;

const CHECKS: [(&str, CheckFn); 12] = [
    ("quadrature moment exactness", quadrature_moments),
    ("projection idempotence", projection_idempotence),
    ("weak gradient polynomial exactness", weak_gradient_exactness),
    ("weak gradient constant kernel", weak_gradient_constant_kernel),
    ("stiffness symmetry and positivity", stiffness_symmetry_positivity),
    ("projected equals plain stabilizer", projected_equals_plain),
    ("coercivity constants stable in h", coercivity_stable),
    ("cholesky agrees with cg", cholesky_matches_cg),
    ("backward euler energy decay", energy_decay),
    ("unconditional stability", unconditional_stability),
    ("steady state preservation", steady_state),
    ("first order in time", temporal_order),
];

/// Names of all checks, in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

pub fn run_check(name: &str) -> Option<CheckOutcome> {
    CHECKS.iter().find(|c| c.0 == name).map(|&(name, f)| outcome(name, f))
}

fn outcome(name: &'static str, f: CheckFn) -> CheckOutcome {
    match f() {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn property_suite() -> Vec<CheckOutcome> {
    CHECKS.iter().map(|&(name, f)| outcome(name, f)).collect()
}

fn space(n: usize, k: usize, j: usize, l: usize, stab: Stabilizer) -> Result<WgSpace> {
    WgSpace::new(build_uniform_square_mesh(n)?, WgConfig::new(k, j, l, stab)?)
}

fn sinsin(p: Point) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn quadrature_moments() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for e in 0..=MAX_TRIANGLE_EXACTNESS {
        let rule = triangle_rule(e)?;
        for a in 0..=e as u32 {
            for b in 0..=(e as u32 - a) {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let got: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                worst = worst.max((got - exact).abs() / exact);
            }
        }
    }
    for n in 1..=MAX_GAUSS_POINTS {
        let rule = gauss_rule(n)?;
        for d in 0..2 * n {
            let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
            let got: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0].powi(d as i32)).sum();
            worst = worst.max((got - exact).abs());
        }
    }
    Ok((worst <= 1e-12, format!("worst relative moment error {worst:.2e}")))
}

fn projection_idempotence() -> Result<(bool, String)> {
    let s = space(4, 3, 2, 2, Stabilizer::Projected)?;
    let f = |p: Point| (2.0 * p[0] + p[1]).exp() * (3.0 * p[1]).cos();
    let mut worst: f64 = 0.0;
    for t in 0..s.num_elements() {
        let q = s.project_interior(t, 3, &f)?;
        let local = {
            let mut v = vec![0.0; s.dim()];
            let off = s.dofs().interior_offset(t);
            v[off..off + q.len()].copy_from_slice(&q);
            v
        };
        let qq = s.project_interior(t, 3, &|p| s.eval_interior(t, &local, p))?;
        worst = worst.max(max_diff(&q, &qq) / norm2(&q));
    }
    let mesh = s.mesh();
    for e in 0..mesh.num_edges() {
        let [lo, hi] = mesh.edges[e];
        let (a, b) = (mesh.vertices[lo], mesh.vertices[hi]);
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        let c = s.project_edge(e, 2, &f);
        let g = |p: Point| {
            let t = 2.0 * ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2 - 1.0;
            legendre_values(2, t).iter().zip(&c).map(|(l, c)| l * c).sum()
        };
        let cc = s.project_edge(e, 2, &g);
        worst = worst.max(max_diff(&c, &cc) / norm2(&c));
    }
    Ok((worst <= 1e-11, format!("max |Q(Qf) - Qf| / |Qf| = {worst:.2e}")))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn weak_gradient_of(s: &WgSpace, t: usize, f: &dyn Fn(Point) -> f64) -> Result<Vec<f64>> {
    let local = s.interpolate_local(t, f)?;
    Ok(s.element_operators(t, &Coefficient::Identity)?.weak_gradient.matvec(&local))
}

fn weak_gradient_exactness() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (k, j, l) in [(1, 1, 0), (2, 2, 1), (2, 2, 2), (3, 3, 2), (3, 2, 3), (4, 4, 3)] {
        let s = space(2, k, j, l, Stabilizer::Projected)?;
        let d = k.min(j) as i32;
        let p = move |x: Point| x[0].powi(d) + 0.5 * x[0] * x[1].powi(d - 1) - x[1];
        let grad = move |x: Point| {
            [
                d as f64 * x[0].powi(d - 1) + 0.5 * x[1].powi(d - 1),
                0.5 * (d - 1) as f64 * x[0] * x[1].powi((d - 2).max(0)) - 1.0,
            ]
        };
        for t in 0..s.num_elements() {
            let got = weak_gradient_of(&s, t, &p)?;
            let want = s.project_vector(t, l, &grad)?;
            let scale = norm2(&want).max(1.0);
            worst = worst.max(got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale);
        }
    }
    Ok((worst <= 1e-10, format!("max relative deviation {worst:.2e}")))
}

fn weak_gradient_constant_kernel() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (k, j, l) in [(1, 0, 0), (2, 1, 1), (3, 3, 3), (4, 2, 3)] {
        let s = space(2, k, j, l, Stabilizer::Plain)?;
        for t in 0..s.num_elements() {
            let unit = norm2(&weak_gradient_of(&s, t, &|p| p[0])?);
            worst = worst.max(norm2(&weak_gradient_of(&s, t, &|_| 2.5)?) / (2.5 * unit));
        }
    }
    Ok((worst <= 1e-10, format!("max |∇_w c| / |c ∇_w x| = {worst:.2e}")))
}

fn stiffness_symmetry_positivity() -> Result<(bool, String)> {
    let mut asym: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (k, j, l) in [(1, 1, 0), (2, 1, 1), (2, 2, 2), (3, 2, 2), (3, 3, 3), (4, 4, 3)] {
        for stab in [Stabilizer::Projected, Stabilizer::Plain] {
            let s = space(2, k, j, l, stab)?;
            let a = assemble_stiffness(&s, &Coefficient::Identity)?;
            asym = asym.max(a.asymmetry() / a.max_abs());
            let dense = DenseMatrix::from_rows(a.dim(), a.dim(), a.to_dense().concat());
            let eig = dense.symmetric_eigenvalues();
            let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
            min_ratio = min_ratio.min(lo / hi);
        }
    }
    Ok((
        asym <= 1e-12 && min_ratio > 1e-10,
        format!("relative asymmetry {asym:.2e}, min λ_min/λ_max {min_ratio:.2e}"),
    ))
}

fn projected_equals_plain() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (k, j, l) in [(1, 1, 1), (1, 0, 1), (2, 1, 2), (2, 2, 2), (2, 0, 2), (3, 2, 3), (3, 3, 3)] {
        let a = assemble_stiffness(&space(4, k, j, l, Stabilizer::Projected)?, &Coefficient::Identity)?;
        let b = assemble_stiffness(&space(4, k, j, l, Stabilizer::Plain)?, &Coefficient::Identity)?;
        let diff = CsrMatrix::linear_combination(1.0, &a, -1.0, &b)?;
        worst = worst.max(diff.max_abs() / a.max_abs());
    }
    Ok((worst <= 1e-12, format!("max relative difference {worst:.2e}")))
}

/// Extreme eigenvalues of `A x = λ G x` by inverse and direct power
/// iteration.
pub fn generalized_extremes(a: &CsrMatrix, g: &CsrMatrix, iterations: usize) -> Result<(f64, f64)> {
    let fa = factorize(a)?;
    let fg = factorize(g)?;
    let start: Vec<f64> = (0..a.dim()).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    let rayleigh = |x: &[f64]| a.quadratic_form(x) / g.quadratic_form(x);
    let mut x = start.clone();
    for _ in 0..iterations {
        x = fa.solve(&g.matvec(&x));
        let s = norm2(&x);
        x.iter_mut().for_each(|v| *v /= s);
    }
    let lo = rayleigh(&x);
    let mut y = start;
    for _ in 0..iterations {
        y = fg.solve(&a.matvec(&y));
        let s = norm2(&y);
        y.iter_mut().for_each(|v| *v /= s);
    }
    Ok((lo, rayleigh(&y)))
}

fn coercivity_stable() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (k, j, l, stab) in [(2, 2, 2, Stabilizer::Projected), (2, 1, 1, Stabilizer::Plain)] {
        let mut bounds = Vec::new();
        for n in [4, 8, 16] {
            let s = space(n, k, j, l, stab)?;
            let a = assemble_stiffness(&s, &Coefficient::Identity)?;
            bounds.push(generalized_extremes(&a, &assemble_h1_gram(&s), 60)?);
        }
        let spread = |v: Vec<f64>| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
        let (c1, c2) = (
            spread(bounds.iter().map(|b| b.0).collect()),
            spread(bounds.iter().map(|b| b.1).collect()),
        );
        ok &= bounds.iter().all(|b| b.0 > 0.0) && c1 <= 2.0 && c2 <= 2.0;
        detail.push(format!(
            "({k},{j},{l}) {stab}: C1 {:.3}..{:.3}, C2 {:.3}..{:.3}",
            bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min),
            bounds.iter().map(|b| b.0).fold(0.0, f64::max),
            bounds.iter().map(|b| b.1).fold(f64::INFINITY, f64::min),
            bounds.iter().map(|b| b.1).fold(0.0, f64::max),
        ));
    }
    Ok((ok, detail.join("; ")))
}

/// Random sparse SPD matrix: a random graph Laplacian plus a positive
/// diagonal shift.
pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut b = TripletBuilder::new(n);
    let mut diag = vec![0.0; n];
    for i in 0..n {
        for _ in 0..3 {
            let j = rng.gen_range(0..n);
            if j != i {
                let w: f64 = rng.gen_range(0.1..1.0);
                b.push(i, j, -w);
                b.push(j, i, -w);
                diag[i] += w;
                diag[j] += w;
            }
        }
    }
    for (i, d) in diag.into_iter().enumerate() {
        b.push(i, i, d + rng.gen_range(0.01..0.5));
    }
    b.build(true)
}

fn cholesky_matches_cg() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(2..=500);
        let a = random_spd(n, &mut rng);
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = factorize(&a)?.solve(&rhs);
        let y = cg_solve(&a, &rhs, 1e-13, 10 * n)?;
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / norm2(&x));
    }
    Ok((worst <= 1e-8, format!("max relative difference {worst:.2e}")))
}

fn free_decay() -> ParabolicProblem {
    let psi: ScalarFn = Arc::new(|p: Point| sinsin(p) + 0.5 * (3.0 * PI * p[0]).sin() * (2.0 * PI * p[1]).sin());
    ParabolicProblem {
        name: "free_decay".into(),
        coefficient: Coefficient::Identity,
        source: Source::Zero,
        initial: psi,
        initial_source: None,
        exact: None,
    }
}

const STABLE: [(usize, usize, usize, Stabilizer); 5] = [
    (1, 1, 0, Stabilizer::Projected),
    (2, 1, 1, Stabilizer::Projected),
    (2, 2, 2, Stabilizer::Projected),
    (2, 1, 1, Stabilizer::Plain),
    (3, 2, 3, Stabilizer::Projected),
];

fn monotone_sequences(tau_values: &[f64], steps: usize) -> Result<(f64, f64)> {
    let problem = free_decay();
    let opts = MarchOptions {
        initial: InitialMode::Projection,
        record_every: Some(1),
    };
    let (mut energy_growth, mut mass_growth): (f64, f64) = (0.0, 0.0);
    for (k, j, l, stab) in STABLE {
        let s = space(8, k, j, l, stab)?;
        let solver = ParabolicSolver::new(&s, &problem)?;
        for &tau in tau_values {
            let traj = solver.march(&TimeGrid::new(tau * steps as f64, steps)?, &opts)?;
            let mut prev: Option<(f64, f64)> = None;
            for c in &traj.checkpoints {
                let e = triple_bar_norm(c.field.values(), solver.stiffness())?;
                let m = l2_norm(c.field.values(), solver.mass());
                if let Some((pe, pm)) = prev {
                    energy_growth = energy_growth.max(e / pe - 1.0);
                    mass_growth = mass_growth.max(m / pm - 1.0);
                }
                prev = Some((e, m));
            }
        }
    }
    Ok((energy_growth, mass_growth))
}

fn energy_decay() -> Result<(bool, String)> {
    let (e, _) = monotone_sequences(&[1e-2], 20)?;
    Ok((e <= 1e-12, format!("max relative energy growth {e:.2e}")))
}

fn unconditional_stability() -> Result<(bool, String)> {
    let (_, m) = monotone_sequences(&[1e-1, 1e-2, 1e-3], 10)?;
    Ok((m <= 1e-12, format!("max relative L2 growth {m:.2e}")))
}

fn steady_state() -> Result<(bool, String)> {
    let problem = ParabolicProblem::polynomial_steady_state();
    let s = space(8, 2, 2, 2, Stabilizer::Projected)?;
    let solver = ParabolicSolver::new(&s, &problem)?;
    let opts = MarchOptions {
        initial: InitialMode::Ritz,
        record_every: Some(1),
    };
    let traj = solver.march(&TimeGrid::new(1.0, 100)?, &opts)?;
    let scale = traj.initial.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for c in &traj.checkpoints[1..] {
        let drift = c.field.sub(&traj.initial).values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(drift / (c.step as f64 * scale));
    }
    Ok((worst <= 1e-8, format!("max drift per step {worst:.2e} (relative)")))
}

fn temporal_order() -> Result<(bool, String)> {
    let problem = ParabolicProblem::paper_sec5();
    let s = space(16, 2, 2, 2, Stabilizer::Projected)?;
    let solver = ParabolicSolver::new(&s, &problem)?;
    let opts = MarchOptions::default();
    let run = |m: usize| -> Result<Vec<f64>> { Ok(solver.march(&TimeGrid::new(1.0, m)?, &opts)?.final_field.into_values()) };
    let reference = run(640)?;
    let mut diffs = Vec::new();
    for m in [10, 20, 40] {
        let u = run(m)?;
        let d: Vec<f64> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();
        diffs.push(l2_norm(&d, solver.mass()));
    }
    let rates: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((
        rates.iter().all(|r| (r - 1.0).abs() <= 0.2),
        format!("rates {}", rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")),
    ))
}

/// Worst relative residual of the elliptic error equation
/// `𝒜(Q_h v - R_h v, w) = l₁ + l₂ + l₃ + 𝒮(Q_h v, w)` over `samples` random
/// `w`, for `v = sin(πx) sin(πy)` and `a = I`.
pub fn error_equation_residual(config: WgConfig, n: usize, samples: usize, seed: u64) -> Result<f64> {
    let s = WgSpace::new(build_uniform_square_mesh(n)?, config)?;
    let grad = |p: Point| [PI * (PI * p[0]).cos() * (PI * p[1]).sin(), PI * (PI * p[0]).sin() * (PI * p[1]).cos()];
    let a = assemble_stiffness(&s, &Coefficient::Identity)?;
    let rhs = assemble_spatial_load(&s, &|p| 2.0 * PI * PI * sinsin(p));
    let rv = factorize(&a)?.solve(&rhs);
    let qv = s.interpolate(&sinsin)?;
    let diff: Vec<f64> = qv.values().iter().zip(&rv).map(|(x, y)| x - y).collect();
    let lhs = a.matvec(&diff);
    let forms = assemble_consistency_forms(&s, &Coefficient::Identity, &sinsin, &grad)?;
    if forms.l1.len() != lhs.len() {
        return Err(WgError::DimensionMismatch {
            expected: lhs.len(),
            found: forms.l1.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let w: Vec<f64> = (0..lhs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let parts = [dot(&forms.l1, &w), dot(&forms.l2, &w), dot(&forms.l3, &w), dot(&forms.stabilizer, &w)];
        let scale: f64 = parts.iter().map(|p| p.abs()).sum::<f64>().max(dot(&lhs, &w).abs());
        worst = worst.max((dot(&lhs, &w) - parts.iter().sum::<f64>()).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        for name in [
            "quadrature moment exactness",
            "projection idempotence",
            "weak gradient polynomial exactness",
            "weak gradient constant kernel",
            "projected equals plain stabilizer",
            "cholesky agrees with cg",
        ] {
            let o = run_check(name).unwrap();
            assert!(o.passed, "{name}: {}", o.detail);
        }
        assert!(run_check("no such check").is_none());
    }

    #[test]
    fn identity_residual_is_small() {
        let r = error_equation_residual(WgConfig::new(1, 1, 1, Stabilizer::Projected).unwrap(), 4, 5, 1).unwrap();
        assert!(r <= 1e-8, "{r}");
    }
}
