use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::analysis::{h1_seminorm, l2_norm, order, triple_bar_norm};
use crate::assembly::assemble_mass;
use crate::error::WgError;
use crate::mesh::{build_uniform_square_mesh, Point};
use crate::wgspace::{Coefficient, Stabilizer, WgConfig, WgSpace};

fn space(n: usize, k: usize, j: usize, l: usize, stab: Stabilizer) -> WgSpace {
    WgSpace::new(build_uniform_square_mesh(n).unwrap(), WgConfig::new(k, j, l, stab).unwrap()).unwrap()
}

fn sinsin(p: Point) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin()
}

fn free_decay(psi: ScalarFn) -> ParabolicProblem {
    ParabolicProblem {
        name: "free_decay".into(),
        coefficient: Coefficient::Identity,
        source: Source::Zero,
        initial: psi,
        initial_source: None,
        exact: None,
    }
}

#[test]
fn ritz_of_zero_is_zero() {
    let s = space(4, 2, 1, 1, Stabilizer::Projected);
    let r = ritz_projection(&s, &Coefficient::Identity, &|_| 0.0).unwrap();
    assert!(r.values().iter().all(|&v| v == 0.0));
}

#[test]
fn ritz_error_in_discrete_h1_converges() {
    let mut errs = Vec::new();
    for n in [4, 8, 16] {
        let s = space(n, 2, 2, 2, Stabilizer::Projected);
        let r = ritz_projection(&s, &Coefficient::Identity, &|p| 2.0 * PI * PI * sinsin(p)).unwrap();
        let q = s.interpolate(&sinsin).unwrap();
        errs.push(h1_seminorm(&s, q.sub(&r).values()));
    }
    let rate = order(errs[1], errs[2], 1.0 / 8.0, 1.0 / 16.0).unwrap();
    assert!(rate > 1.8, "rate {rate} from {errs:?}");
}

#[test]
fn zero_data_stays_zero() {
    let s = space(4, 2, 1, 1, Stabilizer::Projected);
    let problem = free_decay(Arc::new(|_| 0.0));
    let grid = TimeGrid::new(1.0, 10).unwrap();
    let opts = MarchOptions {
        initial: InitialMode::Projection,
        record_every: Some(1),
    };
    let traj = backward_euler_march(&s, &problem, &grid, &opts).unwrap();
    assert_eq!(traj.checkpoints.len(), 11);
    assert!(traj.checkpoints.iter().all(|c| c.field.values().iter().all(|&v| v == 0.0)));
}

#[test]
fn free_decay_dissipates_energy_and_mass() {
    let problem = free_decay(Arc::new(|p: Point| sinsin(p) + 0.3 * (3.0 * PI * p[0]).sin() * p[1] * (1.0 - p[1])));
    for (k, j, l, stab) in [
        (1, 1, 0, Stabilizer::Projected),
        (2, 2, 2, Stabilizer::Projected),
        (2, 1, 1, Stabilizer::Plain),
        (3, 2, 3, Stabilizer::Projected),
    ] {
        let s = space(8, k, j, l, stab);
        let solver = ParabolicSolver::new(&s, &problem).unwrap();
        for tau in [1e-1, 1e-2, 1e-3] {
            let grid = TimeGrid::new(tau * 10.0, 10).unwrap();
            let opts = MarchOptions {
                initial: InitialMode::Projection,
                record_every: Some(1),
            };
            let traj = solver.march(&grid, &opts).unwrap();
            let mut last_e = f64::INFINITY;
            let mut last_m = f64::INFINITY;
            for c in &traj.checkpoints[1..] {
                let e = triple_bar_norm(c.field.values(), solver.stiffness()).unwrap();
                let m = l2_norm(c.field.values(), solver.mass());
                assert!(e <= last_e * (1.0 + 1e-12), "({k},{j},{l}) tau {tau}: energy {e} > {last_e}");
                assert!(m <= last_m * (1.0 + 1e-12), "({k},{j},{l}) tau {tau}: mass {m} > {last_m}");
                last_e = e;
                last_m = m;
            }
        }
    }
}

#[test]
fn steady_state_is_preserved() {
    let problem = ParabolicProblem::polynomial_steady_state();
    let s = space(8, 2, 2, 2, Stabilizer::Projected);
    let grid = TimeGrid::new(1.0, 50).unwrap();
    let opts = MarchOptions {
        initial: InitialMode::Ritz,
        record_every: Some(1),
    };
    let traj = backward_euler_march(&s, &problem, &grid, &opts).unwrap();
    let scale = traj.initial.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for c in &traj.checkpoints {
        let drift = c.field.sub(&traj.initial).values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(drift <= 1e-8 * c.step.max(1) as f64 * scale, "step {}: drift {drift}", c.step);
    }
}

#[test]
fn initial_modes_agree_on_reproduced_polynomials() {
    let problem = ParabolicProblem::polynomial_steady_state();
    let s = space(4, 4, 4, 3, Stabilizer::Projected);
    let ritz = initial_field(&s, &problem, InitialMode::Ritz).unwrap();
    let proj = initial_field(&s, &problem, InitialMode::Projection).unwrap();
    let diff = ritz.sub(&proj).values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn initial_modes_of_zero_are_zero() {
    let mut problem = free_decay(Arc::new(|_| 0.0));
    problem.initial_source = Some(Arc::new(|_| 0.0));
    let s = space(2, 1, 1, 1, Stabilizer::Plain);
    for mode in [InitialMode::Ritz, InitialMode::Projection] {
        assert!(initial_field(&s, &problem, mode).unwrap().values().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn ritz_mode_needs_initial_source() {
    let problem = free_decay(Arc::new(sinsin));
    let s = space(2, 1, 1, 1, Stabilizer::Plain);
    assert!(matches!(
        initial_field(&s, &problem, InitialMode::Ritz),
        Err(WgError::Config(_))
    ));
}

#[test]
fn projection_and_ritz_initial_values_converge_together() {
    let problem = ParabolicProblem::paper_sec5();
    let k = 2;
    let mut diffs = Vec::new();
    for n in [4, 8, 16] {
        let s = space(n, k, 2, 2, Stabilizer::Projected);
        let solver = ParabolicSolver::new(&s, &problem).unwrap();
        let r = solver.initial_field(InitialMode::Ritz).unwrap();
        let q = solver.initial_field(InitialMode::Projection).unwrap();
        diffs.push(l2_norm(r.sub(&q).values(), &assemble_mass(&s)));
    }
    let rate = order(diffs[1], diffs[2], 1.0 / 8.0, 1.0 / 16.0).unwrap();
    assert!(rate >= k as f64, "rate {rate} from {diffs:?}");
}

#[test]
fn first_order_in_time() {
    let problem = ParabolicProblem::paper_sec5();
    let s = space(16, 2, 2, 2, Stabilizer::Projected);
    let solver = ParabolicSolver::new(&s, &problem).unwrap();
    let opts = MarchOptions::default();
    let run = |steps: usize| solver.march(&TimeGrid::new(1.0, steps).unwrap(), &opts).unwrap().final_field;
    let reference = run(640);
    let diffs: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&m| l2_norm(run(m).sub(&reference).values(), solver.mass()))
        .collect();
    for w in diffs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 1.0).abs() <= 0.2, "rate {rate} from {diffs:?}");
    }
}

#[test]
fn singular_configuration_reports_pivot_failure() {
    let problem = ParabolicProblem::paper_sec5();
    let s = space(4, 2, 1, 0, Stabilizer::Projected);
    let grid = TimeGrid::new(1.0, 10).unwrap();
    assert!(matches!(
        backward_euler_march(&s, &problem, &grid, &MarchOptions::default()),
        Err(WgError::NotPositiveDefinite { .. })
    ));
}
