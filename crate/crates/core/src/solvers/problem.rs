use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;
use crate::wgspace::Coefficient;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;

/// Right-hand side `f(x, t)`.
#[derive(Clone)]
pub enum Source {
    Zero,
    /// `f(x, t) = time(t) * space(x)`; the spatial load is assembled once.
    Separable { time: Arc<dyn Fn(f64) -> f64 + Send + Sync>, space: ScalarFn },
    General(SpaceTimeFn),
}

impl Source {
    pub fn eval(&self, p: Point, t: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Separable { time, space } => time(t) * space(p),
            Source::General(f) => f(p, t),
        }
    }
}

/// Manufactured solution used to measure errors.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: SpaceTimeFn,
    pub grad: GradientFn,
}

/// `u_t - ∇·(a∇u) = f` in the unit square, `u = 0` on the boundary,
/// `u(·, 0) = ψ`.
#[derive(Clone)]
pub struct ParabolicProblem {
    pub name: String,
    pub coefficient: Coefficient,
    pub source: Source,
    pub initial: ScalarFn,
    /// `-∇·(a∇ψ)`, needed for the Ritz initial value.
    pub initial_source: Option<ScalarFn>,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ParabolicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("name", &self.name)
            .field("coefficient", &self.coefficient)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

fn sinsin(p: Point) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin()
}

impl ParabolicProblem {
    /// `a = I`, `u = e^{-t} sin(πx) sin(πy)`.
    pub fn paper_sec5() -> Self {
        let two_pi2 = 2.0 * PI * PI;
        ParabolicProblem {
            name: "paper_sec5".into(),
            coefficient: Coefficient::Identity,
            source: Source::Separable {
                time: Arc::new(|t: f64| (-t).exp()),
                space: Arc::new(move |p| (two_pi2 - 1.0) * sinsin(p)),
            },
            initial: Arc::new(sinsin),
            initial_source: Some(Arc::new(move |p| two_pi2 * sinsin(p))),
            exact: Some(ExactSolution {
                u: Arc::new(|p, t| (-t).exp() * sinsin(p)),
                grad: Arc::new(|p, t| {
                    let e = (-t).exp() * PI;
                    [
                        e * (PI * p[0]).cos() * (PI * p[1]).sin(),
                        e * (PI * p[0]).sin() * (PI * p[1]).cos(),
                    ]
                }),
            }),
        }
    }

    /// Time-independent `u = x(1-x)y(1-y)` with the matching steady source.
    pub fn polynomial_steady_state() -> Self {
        let v = |p: Point| p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
        let f = |p: Point| 2.0 * (p[0] * (1.0 - p[0]) + p[1] * (1.0 - p[1]));
        ParabolicProblem {
            name: "polynomial_steady".into(),
            coefficient: Coefficient::Identity,
            source: Source::Separable {
                time: Arc::new(|_| 1.0),
                space: Arc::new(f),
            },
            initial: Arc::new(v),
            initial_source: Some(Arc::new(f)),
            exact: Some(ExactSolution {
                u: Arc::new(move |p, _| v(p)),
                grad: Arc::new(|p, _| {
                    [
                        (1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]),
                        p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1]),
                    ]
                }),
            }),
        }
    }

    /// Registry lookup by name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "paper_sec5" | "sine_decay" => Some(Self::paper_sec5()),
            "polynomial_steady" => Some(Self::polynomial_steady_state()),
            _ => None,
        }
    }

    pub fn registered_names() -> &'static [&'static str] {
        &["paper_sec5", "polynomial_steady"]
    }
}
