use std::f64::consts::PI;

use super::*;
use crate::linalg::{DenseCholesky, DenseMatrix};
use crate::mesh::{build_uniform_square_mesh, Mesh, Point};
use crate::polybasis::poly_dim;

fn reference_triangle_space(k: usize, j: usize, l: usize, stab: Stabilizer) -> WgSpace {
    let mesh = Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], 1);
    WgSpace::new(mesh, WgConfig::new(k, j, l, stab).unwrap()).unwrap()
}

fn square_space(n: usize, k: usize, j: usize, l: usize, stab: Stabilizer) -> WgSpace {
    WgSpace::new(build_uniform_square_mesh(n).unwrap(), WgConfig::new(k, j, l, stab).unwrap()).unwrap()
}

fn eval_poly(space: &WgSpace, t: usize, degree: usize, c: &[f64], p: Point) -> f64 {
    space.frame(t).basis(degree).values(p).iter().zip(c).map(|(a, b)| a * b).sum()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[test]
fn interior_projection_reproduces_polynomials() {
    let space = square_space(2, 3, 1, 2, Stabilizer::Projected);
    let f = |p: Point| 1.0 - 2.0 * p[0] + p[0] * p[1] * p[1] + 3.0 * p[1].powi(3);
    let c = space.project_interior(5, 3, &f).unwrap();
    for p in [[0.6, 0.2], [0.9, 0.4], [0.75, 0.1]] {
        assert!((eval_poly(&space, 5, 3, &c, p) - f(p)).abs() < 1e-11);
    }
}

#[test]
fn x_squared_onto_linears_matches_moment_solve() {
    // oracle: Gram system in {1, x, y} with exact monomial moments
    let moment = |a: u32, b: u32| factorial(a) * factorial(b) / factorial(a + b + 2);
    let mono = [(0u32, 0u32), (1, 0), (0, 1)];
    let mut gram = DenseMatrix::zeros(3, 3);
    let mut rhs = vec![0.0; 3];
    for (r, &(a, b)) in mono.iter().enumerate() {
        for (s, &(c, d)) in mono.iter().enumerate() {
            gram[(r, s)] = moment(a + c, b + d);
        }
        rhs[r] = moment(a + 2, b);
    }
    let oracle = DenseCholesky::new(&gram).unwrap().solve(&rhs);

    let space = reference_triangle_space(1, 0, 0, Stabilizer::Plain);
    let c = space.project_interior(0, 1, &|p| p[0] * p[0]).unwrap();
    for p in [[0.1, 0.1], [0.5, 0.2], [0.2, 0.7]] {
        let expected = oracle[0] + oracle[1] * p[0] + oracle[2] * p[1];
        assert!((eval_poly(&space, 0, 1, &c, p) - expected).abs() < 1e-13);
    }
}

#[test]
fn interior_projection_residual_is_orthogonal() {
    let space = square_space(2, 2, 1, 1, Stabilizer::Plain);
    let f = |p: Point| (3.0 * p[0]).exp() * (p[1] + 0.3).sin();
    let t = 2;
    let c = space.project_interior(t, 2, &f).unwrap();
    let frame = space.frame(t);
    let basis = frame.basis(2);
    let (mut fnorm, mut res) = (0.0, vec![0.0; basis.dim()]);
    for (p, w) in frame.quadrature(&space.data_rules().triangle) {
        let v = basis.values(p);
        let r = f(p) - v.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        fnorm += w * f(p) * f(p);
        for (ri, vi) in res.iter_mut().zip(&v) {
            *ri += w * r * vi;
        }
    }
    let mass = mass_matrix(frame, &basis, &space.data_rules().triangle);
    for (i, ri) in res.iter().enumerate() {
        let pnorm = mass[(i, i)].sqrt();
        assert!(ri.abs() <= 1e-10 * fnorm.sqrt() * pnorm, "component {i}: {ri}");
    }
}

fn projection_error(n: usize, k: usize) -> f64 {
    let space = square_space(n, k, 0, 0, Stabilizer::Plain);
    let f = |p: Point| (PI * p[0]).sin() * (PI * p[1]).sin();
    let mut err = 0.0;
    for t in 0..space.num_elements() {
        let c = space.project_interior(t, k, &f).unwrap();
        for (p, w) in space.frame(t).quadrature(&space.data_rules().triangle) {
            err += w * (f(p) - eval_poly(&space, t, k, &c, p)).powi(2);
        }
    }
    err.sqrt()
}

#[test]
fn interior_projection_converges_at_order_k_plus_one() {
    let ratio = projection_error(4, 2) / projection_error(8, 2);
    assert!((ratio.log2() - 3.0).abs() < 0.2, "ratio {ratio}");
}

fn edge_param(space: &WgSpace, e: usize, p: Point) -> f64 {
    let [a, _] = space.mesh().edges[e];
    let pa = space.mesh().vertices[a];
    let len = space.mesh().edge_length(e);
    2.0 * ((p[0] - pa[0]).powi(2) + (p[1] - pa[1]).powi(2)).sqrt() / len - 1.0
}

#[test]
fn edge_projection_examples() {
    let space = square_space(2, 1, 2, 1, Stabilizer::Plain);
    let e = 4;
    let c = space.project_edge(e, 3, &|_| 2.5);
    assert!((c[0] - 2.5).abs() < 1e-14 && c[1..].iter().all(|v| v.abs() < 1e-14));

    let c = space.project_edge(e, 0, &|p| edge_param(&space, e, p));
    assert!(c[0].abs() < 1e-14);

    let c = space.project_edge(e, 1, &|p| edge_param(&space, e, p).powi(2));
    assert!((c[0] - 1.0 / 3.0).abs() < 1e-13 && c[1].abs() < 1e-13);
}

#[test]
fn vector_projection_is_componentwise() {
    let space = square_space(1, 1, 1, 1, Stabilizer::Plain);
    let v = space.project_vector(0, 1, &|p| [p[0], 2.0 - p[1]]).unwrap();
    let a = space.project_interior(0, 1, &|p| p[0]).unwrap();
    let b = space.project_interior(0, 1, &|p| 2.0 - p[1]).unwrap();
    assert_eq!(v, [a, b].concat());
}

fn local_weak_gradient(space: &WgSpace, t: usize, local: &[f64]) -> Vec<f64> {
    space
        .element_operators(t, &Coefficient::Identity)
        .unwrap()
        .weak_gradient
        .matvec(local)
}

#[test]
fn weak_gradient_of_constant_vanishes() {
    for (k, j, l) in [(1, 0, 0), (2, 1, 2), (3, 3, 3), (4, 2, 3)] {
        let space = square_space(2, k, j, l, Stabilizer::Projected);
        let local = space.interpolate_local(3, &|_| 1.0).unwrap();
        let g = local_weak_gradient(&space, 3, &local);
        assert!(g.iter().all(|v| v.abs() < 1e-10), "({k},{j},{l}): {g:?}");
    }
}

#[test]
fn weak_gradient_of_polynomial_trace_is_projected_gradient() {
    let f = |p: Point| p[0] * p[0] - 3.0 * p[0] * p[1] + p[1];
    let grad = |p: Point| [2.0 * p[0] - 3.0 * p[1], -3.0 * p[0] + 1.0];
    for (k, j, l) in [(2, 2, 1), (2, 3, 2), (2, 2, 0), (3, 3, 3)] {
        let space = square_space(2, k, j, l, Stabilizer::Plain);
        let t = 6;
        let local = space.interpolate_local(t, &f).unwrap();
        let g = local_weak_gradient(&space, t, &local);
        let expected = space.project_vector(t, l, &grad).unwrap();
        for (a, b) in g.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-11, "({k},{j},{l}): {a} vs {b}");
        }
    }
}

#[test]
fn weak_gradient_commutes_with_projection() {
    let f = |p: Point| (PI * p[0]).sin() * (2.0 * p[1]).cos();
    let grad = |p: Point| [PI * (PI * p[0]).cos() * (2.0 * p[1]).cos(), -2.0 * (PI * p[0]).sin() * (2.0 * p[1]).sin()];
    for (k, j, l) in [(1, 1, 1), (2, 2, 2), (2, 2, 1), (3, 3, 2)] {
        // the identity holds up to the data quadrature error
        let cfg = WgConfig::new(k, j, l, Stabilizer::Plain).unwrap();
        let q = QuadratureOrders {
            data_triangle_exactness: 20,
            data_edge_points: 12,
            ..cfg.quadrature
        };
        let space = WgSpace::new(build_uniform_square_mesh(3).unwrap(), cfg.with_quadrature(q).unwrap()).unwrap();
        for t in [0, 7] {
            let local = space.interpolate_local(t, &f).unwrap();
            let g = local_weak_gradient(&space, t, &local);
            let expected = space.project_vector(t, l, &grad).unwrap();
            for (a, b) in g.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "({k},{j},{l}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn weak_gradient_forms_agree() {
    for (k, j, l) in [(1, 1, 0), (2, 0, 1), (3, 2, 3), (4, 4, 4), (2, 4, 0)] {
        let space = square_space(2, k, j, l, Stabilizer::Projected);
        for t in 0..2 {
            let a = weak_gradient_rhs(space.config(), space.frame(t), space.rules());
            let b = weak_gradient_rhs_by_parts(space.config(), space.frame(t), space.rules());
            assert!(a.sub(&b).max_abs() <= 1e-11 * a.max_abs(), "({k},{j},{l})");
        }
    }
}

#[test]
fn weak_gradient_exact_for_polynomials() {
    // l >= k - 1 and j >= k
    let f = |p: Point| 0.5 + p[0] - p[1] * p[1] * p[0];
    let grad = |p: Point| [1.0 - p[1] * p[1], -2.0 * p[0] * p[1]];
    let space = square_space(2, 3, 3, 2, Stabilizer::Projected);
    let t = 1;
    let local = space.interpolate_local(t, &f).unwrap();
    let g = local_weak_gradient(&space, t, &local);
    let basis = space.frame(t).basis(2);
    let nl = basis.dim();
    for p in [[0.7, 0.1], [0.9, 0.3]] {
        let v = basis.values(p);
        let gx: f64 = v.iter().zip(&g[..nl]).map(|(a, b)| a * b).sum();
        let gy: f64 = v.iter().zip(&g[nl..]).map(|(a, b)| a * b).sum();
        assert!((gx - grad(p)[0]).abs() < 1e-11 && (gy - grad(p)[1]).abs() < 1e-11);
    }
}

#[test]
fn stabilizer_vanishes_on_matching_traces() {
    let f = |p: Point| p[0] * p[1] + p[1] * p[1];
    for stab in [Stabilizer::Plain, Stabilizer::Projected] {
        let space = square_space(2, 2, 2, 1, stab);
        let local = space.interpolate_local(2, &f).unwrap();
        let s = stabilizer_matrix(space.config(), space.frame(2), space.rules());
        assert!(s.quadratic_form(&local).abs() < 1e-13);
    }
}

#[test]
fn projected_equals_plain_when_projection_is_identity() {
    let p = square_space(2, 2, 2, 2, Stabilizer::Projected);
    let u = square_space(2, 2, 2, 2, Stabilizer::Plain);
    for t in 0..2 {
        let sp = stabilizer_matrix(p.config(), p.frame(t), p.rules());
        let su = stabilizer_matrix(u.config(), u.frame(t), u.rules());
        assert!(sp.sub(&su).max_abs() <= 1e-12 * su.max_abs());
    }
}

#[test]
fn projection_removes_energy_from_plain_stabilizer() {
    let p = square_space(2, 2, 1, 1, Stabilizer::Projected);
    let u = square_space(2, 2, 1, 1, Stabilizer::Plain);
    let sp = stabilizer_matrix(p.config(), p.frame(0), p.rules());
    let su = stabilizer_matrix(u.config(), u.frame(0), u.rules());
    let eig = su.sub(&sp).symmetric_eigenvalues();
    let scale = su.max_abs();
    assert!(eig[0] >= -1e-12 * scale);
    // the quadratic part of v_0's trace is invisible after projection on each edge
    let rank = eig.iter().filter(|&&e| e > 1e-10 * scale).count();
    assert!(rank >= 3, "rank {rank}");
}

#[test]
fn element_operator_invariants() {
    for (k, j, l, stab) in [
        (1, 1, 0, Stabilizer::Projected),
        (2, 1, 1, Stabilizer::Plain),
        (3, 2, 3, Stabilizer::Projected),
        (4, 4, 2, Stabilizer::Plain),
    ] {
        let space = square_space(2, k, j, l, stab);
        let ops = space.element_operators(1, &Coefficient::Identity).unwrap();
        let scale = ops.stiffness.max_abs().max(ops.stabilizer.max_abs());
        assert!(ops.stiffness.asymmetry() <= 1e-12 * scale);
        assert!(ops.stabilizer.asymmetry() <= 1e-12 * scale);
        assert!(ops.stabilizer.symmetric_eigenvalues()[0] >= -1e-12 * scale);
        assert!(DenseCholesky::new(&ops.mass).is_ok());
        assert_eq!(ops.weak_gradient.rows(), 2 * poly_dim(l));
        assert_eq!(ops.weak_gradient.cols(), poly_dim(k) + 3 * (j + 1));
    }
}

#[test]
fn constants_are_in_the_local_kernel() {
    let space = square_space(2, 2, 1, 2, Stabilizer::Projected);
    let ops = space.element_operators(4, &Coefficient::Identity).unwrap();
    let local = space.interpolate_local(4, &|_| 1.0).unwrap();
    assert!(ops.stiffness.quadratic_form(&local).abs() < 1e-12);
    assert!(ops.stabilizer.quadratic_form(&local).abs() < 1e-12);
}

#[test]
fn doubling_the_coefficient_doubles_stiffness_only() {
    let space = square_space(2, 2, 2, 1, Stabilizer::Projected);
    let a = space.element_operators(0, &Coefficient::Identity).unwrap();
    let b = space.element_operators(0, &Coefficient::scalar(2.0)).unwrap();
    assert!(b.stiffness.sub(&a.stiffness.scaled(2.0)).max_abs() <= 1e-13 * b.stiffness.max_abs());
    assert_eq!(a.stabilizer, b.stabilizer);
}

#[test]
fn rejects_indefinite_coefficient() {
    let space = square_space(1, 1, 1, 1, Stabilizer::Plain);
    let bad = Coefficient::Constant([[1.0, 0.0], [0.0, -1.0]]);
    assert!(space.element_operators(0, &bad).is_err());
}

/// Orthonormal basis of the complement of `c`.
fn complement_basis(c: &[f64]) -> DenseMatrix {
    let n = c.len();
    let cn: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut q: Vec<Vec<f64>> = vec![c.iter().map(|v| v / cn).collect()];
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in &q {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let cols = q.len() - 1;
    let mut z = DenseMatrix::zeros(n, cols);
    for (jc, b) in q[1..].iter().enumerate() {
        for i in 0..n {
            z[(i, jc)] = b[i];
        }
    }
    z
}

#[test]
fn local_form_is_positive_off_constants() {
    let space = square_space(1, 1, 1, 0, Stabilizer::Projected);
    let ops = space.element_operators(0, &Coefficient::Identity).unwrap();
    let mut a = ops.stiffness.clone();
    a.add_assign(&ops.stabilizer);
    let constant = space.interpolate_local(0, &|_| 1.0).unwrap();
    let z = complement_basis(&constant);
    let az = z.tmatmul(&a.matmul(&z));
    let lmin = az.symmetric_eigenvalues()[0];
    assert!(lmin > 1e-8 * az.max_abs(), "lambda_min {lmin}");
}

#[test]
fn interpolation_has_free_dimension() {
    let space = square_space(3, 2, 1, 1, Stabilizer::Plain);
    let v = space.interpolate(&|p| p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])).unwrap();
    assert_eq!(v.len(), space.dim());
    let local = space.gather(4, v.values());
    assert_eq!(local.len(), space.dofs().local_dim());
}
