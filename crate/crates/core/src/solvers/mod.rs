//! The elliptic projection and the backward-Euler time march.

mod problem;
mod stepping;
mod time;

#[cfg(test)]
mod tests;

pub use problem::{ExactSolution, GradientFn, ParabolicProblem, ScalarFn, Source, SpaceTimeFn};
pub use stepping::{
    backward_euler_march, initial_field, ritz_projection, Checkpoint, InitialMode, MarchOptions, ParabolicSolver,
    Trajectory,
};
pub use time::TimeGrid;
