use super::problem::{ParabolicProblem, Source};
use super::time::TimeGrid;
use crate::assembly::{assemble_load, assemble_mass, assemble_spatial_load, assemble_stiffness};
use crate::error::{Result, WgError};
use crate::linalg::{factorize, norm2, CsrMatrix, Factorization};
use crate::mesh::Point;
use crate::wgspace::{Coefficient, WeakField, WgSpace};

/// How `U_h⁰` is obtained from `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialMode {
    /// Elliptic projection `R_h ψ`.
    #[default]
    Ritz,
    /// `Q_h ψ`.
    Projection,
}

#[derive(Debug, Clone, Default)]
pub struct MarchOptions {
    pub initial: InitialMode,
    /// Keep `Uⁿ` whenever `n` is a multiple of this stride (`n = 0` included).
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub time: f64,
    pub field: WeakField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub initial: WeakField,
    pub final_field: WeakField,
    pub checkpoints: Vec<Checkpoint>,
}

/// Solves the elliptic problem `𝒜(R_h v, w) = (f_v, w_0)`.
pub fn ritz_projection(space: &WgSpace, a: &Coefficient, f_v: &(dyn Fn(Point) -> f64 + Sync)) -> Result<WeakField> {
    let stiffness = assemble_stiffness(space, a)?;
    ritz_with(&stiffness, space, f_v)
}

fn ritz_with(stiffness: &CsrMatrix, space: &WgSpace, f_v: &(dyn Fn(Point) -> f64 + Sync)) -> Result<WeakField> {
    let rhs = assemble_spatial_load(space, f_v);
    let factor = factorize(stiffness)?;
    Ok(WeakField::from_values(factor.solve(&rhs)))
}

/// Backward-Euler discretization of one problem on one space, with the
/// stiffness and mass operators assembled once.
pub struct ParabolicSolver<'a> {
    space: &'a WgSpace,
    problem: &'a ParabolicProblem,
    stiffness: CsrMatrix,
    mass: CsrMatrix,
}

impl<'a> ParabolicSolver<'a> {
    pub fn new(space: &'a WgSpace, problem: &'a ParabolicProblem) -> Result<Self> {
        Ok(ParabolicSolver {
            space,
            problem,
            stiffness: assemble_stiffness(space, &problem.coefficient)?,
            mass: assemble_mass(space),
        })
    }

    pub fn space(&self) -> &WgSpace {
        self.space
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn ritz_projection(&self, f_v: &(dyn Fn(Point) -> f64 + Sync)) -> Result<WeakField> {
        ritz_with(&self.stiffness, self.space, f_v)
    }

    pub fn initial_field(&self, mode: InitialMode) -> Result<WeakField> {
        match mode {
            InitialMode::Projection => self.space.interpolate(self.problem.initial.as_ref()),
            InitialMode::Ritz => {
                let f = self.problem.initial_source.as_ref().ok_or_else(|| {
                    WgError::Config(format!(
                        "problem '{}' has no -div(a grad psi); use the projection initial value",
                        self.problem.name
                    ))
                })?;
                self.ritz_projection(f.as_ref())
            }
        }
    }

    /// `(M/τ + 𝒜) Uⁿ = M/τ Uⁿ⁻¹ + Fⁿ` with `Fⁿ = (f(·, t_n), v_0)`.
    pub fn march(&self, grid: &TimeGrid, options: &MarchOptions) -> Result<Trajectory> {
        let u0 = self.initial_field(options.initial)?;
        let tau = grid.tau();
        let step_matrix = CsrMatrix::linear_combination(1.0 / tau, &self.mass, 1.0, &self.stiffness)?;
        let factor: Factorization = factorize(&step_matrix)?;

        let n = self.space.dim();
        let spatial_load = match &self.problem.source {
            Source::Separable { space, .. } => Some(assemble_spatial_load(self.space, space.as_ref())),
            _ => None,
        };
        let mut checkpoints = Vec::new();
        if options.record_every.is_some() {
            checkpoints.push(Checkpoint {
                step: 0,
                time: 0.0,
                field: u0.clone(),
            });
        }

        let limit = 1e6 * norm2(u0.values()) + 1e6;
        let mut u = u0.values().to_vec();
        let mut rhs = vec![0.0; n];
        let mut work = vec![0.0; n];
        for step in 1..=grid.steps {
            let t = grid.node(step);
            self.mass.matvec_into(&u, &mut rhs);
            rhs.iter_mut().for_each(|r| *r /= tau);
            match (&self.problem.source, &spatial_load) {
                (Source::Zero, _) => {}
                (Source::Separable { time, .. }, Some(load)) => {
                    let g = time(t);
                    rhs.iter_mut().zip(load).for_each(|(r, l)| *r += g * l);
                }
                (source, _) => {
                    let f = |p: Point, s: f64| source.eval(p, s);
                    let load = assemble_load(self.space, &f, t);
                    rhs.iter_mut().zip(&load.values).for_each(|(r, l)| *r += l);
                }
            }
            factor.solve_into(&rhs, &mut u, &mut work);
            let norm = norm2(&u);
            if !(norm <= limit) {
                return Err(WgError::InstabilityDetected { step, norm });
            }
            if options.record_every.is_some_and(|k| step % k == 0) {
                checkpoints.push(Checkpoint {
                    step,
                    time: t,
                    field: WeakField::from_values(u.clone()),
                });
            }
        }
        Ok(Trajectory {
            grid: *grid,
            initial: u0,
            final_field: WeakField::from_values(u),
            checkpoints,
        })
    }
}

pub fn initial_field(space: &WgSpace, problem: &ParabolicProblem, mode: InitialMode) -> Result<WeakField> {
    ParabolicSolver::new(space, problem)?.initial_field(mode)
}

pub fn backward_euler_march(
    space: &WgSpace,
    problem: &ParabolicProblem,
    grid: &TimeGrid,
    options: &MarchOptions,
) -> Result<Trajectory> {
    ParabolicSolver::new(space, problem)?.march(grid, options)
}
