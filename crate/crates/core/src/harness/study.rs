use rayon::prelude::*;

use super::config::{Combination, StudySpec, TauMode};
use crate::analysis::{error_field, finalize_table, l2_norm, triple_bar_norm, ConvergenceRecord, Status};
use crate::error::{Result, WgError};
use crate::mesh::build_uniform_square_mesh;
use crate::solvers::{InitialMode, MarchOptions, ParabolicProblem, ParabolicSolver, TimeGrid};
use crate::wgspace::{WeakField, WgSpace};

/// One convergence table, rows ascending in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub combination: Combination,
    pub records: Vec<ConvergenceRecord>,
    pub status: Status,
    /// Solver messages of failed levels, `(n, message)`.
    pub failures: Vec<(usize, String)>,
}

impl StudyTable {
    /// Finest-pair `(|||e||| order, ‖e‖ order)`.
    pub fn finest_orders(&self) -> (Option<f64>, Option<f64>) {
        self.records
            .last()
            .map_or((None, None), |r| (r.triple_bar_order, r.l2_order))
    }
}

/// Rayon pool sized by `WG_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("WG_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| WgError::Config(format!("WG_THREADS = '{v}' is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| WgError::Internal(e.to_string()))
}

/// Solution at `T` on one level together with the operators needed for
/// its errors.
pub struct LevelSolution {
    pub space: WgSpace,
    pub grid: TimeGrid,
    pub field: WeakField,
    pub triple_bar_error: f64,
    pub l2_error: f64,
}

pub fn solve_level(
    problem: &ParabolicProblem,
    combination: Combination,
    n: usize,
    tau: TauMode,
    t_final: f64,
    initial: InitialMode,
) -> Result<LevelSolution> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| WgError::Config(format!("problem '{}' has no exact solution", problem.name)))?;
    let space = WgSpace::new(build_uniform_square_mesh(n)?, combination.config()?)?;
    let grid = tau.grid(combination.k, n, t_final)?;
    let (field, triple_bar_error, l2_error) = {
        let solver = ParabolicSolver::new(&space, problem)?;
        let options = MarchOptions {
            initial,
            record_every: None,
        };
        let trajectory = solver.march(&grid, &options)?;
        let e = error_field(&space, &trajectory.final_field, exact, grid.t_final)?;
        let tb = triple_bar_norm(e.values(), solver.stiffness())?;
        let l2 = l2_norm(e.values(), solver.mass());
        (trajectory.final_field, tb, l2)
    };
    Ok(LevelSolution {
        space,
        grid,
        field,
        triple_bar_error,
        l2_error,
    })
}

/// Runs every level of one combination; solver failures become
/// `NI_unstable` rows instead of errors.
pub fn run_combination(spec: &StudySpec, combination: Combination) -> Result<StudyTable> {
    let problem = ParabolicProblem::by_name(&spec.problem)
        .ok_or_else(|| WgError::Config(format!("unknown problem '{}'", spec.problem)))?;
    let mut records = Vec::with_capacity(spec.ladder.len());
    let mut failures = Vec::new();
    for &n in &spec.ladder {
        let h = 1.0 / n as f64;
        let grid = spec.tau.grid(combination.k, n, spec.t_final)?;
        match solve_level(&problem, combination, n, spec.tau, spec.t_final, spec.initial) {
            Ok(level) => {
                log::info!(
                    "{combination} n={n} steps={}: |||e|||={:.6e} ‖e‖={:.6e}",
                    grid.steps,
                    level.triple_bar_error,
                    level.l2_error
                );
                records.push(ConvergenceRecord::new(h, grid.tau(), level.triple_bar_error, level.l2_error));
            }
            Err(e @ WgError::Config(_)) => return Err(e),
            Err(e) => {
                log::info!("{combination} n={n}: {e}");
                failures.push((n, e.to_string()));
                records.push(ConvergenceRecord::failed(h, grid.tau(), Status::NiUnstable));
            }
        }
    }
    let status = finalize_table(&mut records);
    Ok(StudyTable {
        combination,
        records,
        status,
        failures,
    })
}

/// All combinations of `spec`, run concurrently and returned in
/// `(k, j, l, stabilizer)` order.
pub fn run_study(spec: &StudySpec) -> Result<Vec<StudyTable>> {
    spec.validate()?;
    let combinations = spec.combinations();
    let pool = worker_pool()?;
    pool.install(|| {
        combinations
            .par_iter()
            .map(|&c| run_combination(spec, c))
            .collect::<Result<Vec<_>>>()
    })
}
