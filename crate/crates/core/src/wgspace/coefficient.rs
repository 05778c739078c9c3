use std::fmt;
use std::sync::Arc;

use crate::error::{Result, WgError};
use crate::mesh::Point;

pub type Tensor = [[f64; 2]; 2];

/// Diffusion tensor `a(x)`, symmetric positive definite at every point.
#[derive(Clone, Default)]
pub enum Coefficient {
    #[default]
    Identity,
    Constant(Tensor),
    Field(Arc<dyn Fn(Point) -> Tensor + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Identity => f.write_str("Identity"),
            Coefficient::Constant(a) => write!(f, "Constant({a:?})"),
            Coefficient::Field(_) => f.write_str("Field(..)"),
        }
    }
}

impl Coefficient {
    pub fn scalar(s: f64) -> Self {
        Coefficient::Constant([[s, 0.0], [0.0, s]])
    }

    pub fn eval(&self, p: Point) -> Tensor {
        match self {
            Coefficient::Identity => [[1.0, 0.0], [0.0, 1.0]],
            Coefficient::Constant(a) => *a,
            Coefficient::Field(f) => f(p),
        }
    }

    /// Evaluates and checks symmetry and positive definiteness.
    pub fn eval_checked(&self, p: Point) -> Result<Tensor> {
        let a = self.eval(p);
        check_spd(a, p)?;
        Ok(a)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Coefficient::Identity)
    }
}

pub fn apply(a: &Tensor, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn check_spd(a: Tensor, p: Point) -> Result<()> {
    let scale = a[0][0].abs().max(a[1][1].abs()).max(f64::MIN_POSITIVE);
    let finite = a.iter().flatten().all(|v| v.is_finite());
    let symmetric = (a[0][1] - a[1][0]).abs() <= 1e-12 * scale;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(finite && symmetric && a[0][0] > 0.0 && det > 0.0) {
        return Err(WgError::Config(format!(
            "diffusion tensor {a:?} at ({}, {}) is not symmetric positive definite",
            p[0], p[1]
        )));
    }
    Ok(())
}
