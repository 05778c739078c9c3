use std::fmt::Write as _;

use super::config::{StudySpec, SurfaceSource};
use super::emit::format_sci;
use super::study::solve_level;
use crate::error::{Result, WgError};
use crate::mesh::{build_uniform_square_mesh, Point};
use crate::solvers::ParabolicProblem;
use crate::wgspace::{WeakField, WgSpace};

/// Surface of the first combination of `spec` at `T`, on level
/// `surface_level` (finest ladder entry by default).
pub fn export_surface(spec: &StudySpec) -> Result<String> {
    spec.validate()?;
    let problem = ParabolicProblem::by_name(&spec.problem)
        .ok_or_else(|| WgError::Config(format!("unknown problem '{}'", spec.problem)))?;
    let combination = spec.combinations()[0];
    let n = spec.surface_level.unwrap_or_else(|| *spec.ladder.last().expect("validated ladder"));
    let t = spec.t_final;
    match spec.surface_source {
        SurfaceSource::Discrete => {
            let level = solve_level(&problem, combination, n, spec.tau, t, spec.initial)?;
            export_solution_surface(&level.space, &level.field, spec.surface_samples)
        }
        SurfaceSource::Projection | SurfaceSource::Exact => {
            let exact = problem
                .exact
                .as_ref()
                .ok_or_else(|| WgError::Config(format!("problem '{}' has no exact solution", problem.name)))?;
            let u = |p: Point| (exact.u)(p, t);
            if spec.surface_source == SurfaceSource::Exact {
                return export_function_surface(&u, spec.surface_samples);
            }
            let space = WgSpace::new(build_uniform_square_mesh(n)?, combination.config()?)?;
            export_solution_surface(&space, &space.interpolate(&u)?, spec.surface_samples)
        }
    }
}

/// Samples of `u_0` on an `n_s × n_s` grid over the unit square, one
/// `x y u` line per sample, `x` varying fastest.
pub fn export_solution_surface(space: &WgSpace, field: &WeakField, n_s: usize) -> Result<String> {
    if field.len() != space.dim() {
        return Err(WgError::DimensionMismatch {
            expected: space.dim(),
            found: field.len(),
        });
    }
    sample_grid(n_s, |p| {
        let t = space
            .mesh()
            .locate(p)
            .ok_or_else(|| WgError::Internal(format!("sample {p:?} outside the mesh")))?;
        Ok(space.eval_interior(t, field.values(), p))
    })
}

/// The same layout for a closed-form function.
pub fn export_function_surface(f: &dyn Fn(Point) -> f64, n_s: usize) -> Result<String> {
    sample_grid(n_s, |p| Ok(f(p)))
}

fn sample_grid(n_s: usize, mut eval: impl FnMut(Point) -> Result<f64>) -> Result<String> {
    if n_s < 2 {
        return Err(WgError::Config(format!("surface sampling needs n_s >= 2, got {n_s}")));
    }
    let step = 1.0 / (n_s - 1) as f64;
    let mut out = String::with_capacity(n_s * n_s * 40);
    for iy in 0..n_s {
        for ix in 0..n_s {
            let p = [ix as f64 * step, iy as f64 * step];
            let _ = writeln!(out, "{} {} {}", format_sci(p[0]), format_sci(p[1]), format_sci(eval(p)?));
        }
    }
    Ok(out)
}

/// Parses the three-column format back into `(x, y, u)` triples.
pub fn parse_surface(text: &str) -> Result<Vec<[f64; 3]>> {
    text.lines()
        .map(|line| {
            let v: Vec<f64> = line.split_whitespace().filter_map(|s| s.parse().ok()).collect();
            <[f64; 3]>::try_from(v).map_err(|_| WgError::Config(format!("bad surface line '{line}'")))
        })
        .collect()
}
