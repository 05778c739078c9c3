//! Gauss–Legendre rules on `[-1, 1]` and positive interior rules on the
//! reference triangle `(0,0), (1,0), (0,1)`.

use crate::error::{Result, WgError};

/// Nodes, positive weights and the polynomial degree integrated exactly.
///
/// `D = 1` rules live on `[-1, 1]` (measure 2), `D = 2` rules on the
/// reference triangle (measure 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

pub type LineRule = QuadratureRule<1>;
pub type TriangleRule = QuadratureRule<2>;

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub const MAX_GAUSS_POINTS: usize = 12;
pub const MAX_TRIANGLE_EXACTNESS: usize = 20;

/// Gauss–Legendre rule with `points` nodes, exact to degree `2 points - 1`.
pub fn gauss_rule(points: usize) -> Result<LineRule> {
    if !(1..=MAX_GAUSS_POINTS).contains(&points) {
        return Err(WgError::QuadratureOutOfRange(format!(
            "gauss rule with {points} points (supported 1..={MAX_GAUSS_POINTS})"
        )));
    }
    Ok(gauss_legendre(points))
}

/// Unchecked Gauss–Legendre construction by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> LineRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    // ascending order
    nodes.reverse();
    weights.reverse();
    QuadratureRule {
        points: nodes.into_iter().map(|x| [x]).collect(),
        weights,
        exactness: 2 * n - 1,
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Triangle rule exact for total degree `exactness`.
///
/// Degrees 0–2 use the centroid and the three-point interior rule; higher
/// degrees use a collapsed (Duffy) product of Gauss–Legendre rules, which has
/// strictly interior nodes and positive weights.
pub fn triangle_rule(exactness: usize) -> Result<TriangleRule> {
    if exactness > MAX_TRIANGLE_EXACTNESS {
        return Err(WgError::QuadratureOutOfRange(format!(
            "triangle rule of exactness {exactness} (supported 0..={MAX_TRIANGLE_EXACTNESS})"
        )));
    }
    Ok(match exactness {
        0 | 1 => QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            exactness: 1,
        },
        2 => QuadratureRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 6.0; 3],
            exactness: 2,
        },
        d => collapsed_rule(d),
    })
}

fn collapsed_rule(d: usize) -> TriangleRule {
    // x = a, y = b (1 - a), dx dy = (1 - a) da db
    let pa = (d + 2).div_ceil(2);
    let pb = (d + 1).div_ceil(2);
    let ga = gauss_legendre(pa);
    let gb = gauss_legendre(pb);
    let mut points = Vec::with_capacity(pa * pb);
    let mut weights = Vec::with_capacity(pa * pb);
    for (xa, wa) in ga.points.iter().zip(&ga.weights) {
        let a = 0.5 * (xa[0] + 1.0);
        for (xb, wb) in gb.points.iter().zip(&gb.weights) {
            let b = 0.5 * (xb[0] + 1.0);
            points.push([a, b * (1.0 - a)]);
            weights.push(0.25 * wa * wb * (1.0 - a));
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness: d,
    }
}
