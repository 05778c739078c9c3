use std::fmt;
use std::str::FromStr;

use crate::error::{Result, WgError};
use crate::polybasis::{MAX_GAUSS_POINTS, MAX_TRIANGLE_EXACTNESS};

/// Stabilizer pairing the element-boundary discrepancy `v_b - v_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stabilizer {
    /// Discrepancies are L²-projected onto `P_m(e)`, `m = max(j, l)`, before
    /// pairing.
    Projected,
    /// Discrepancies are paired directly.
    Plain,
}

impl fmt::Display for Stabilizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stabilizer::Projected => "projected",
            Stabilizer::Plain => "plain",
        })
    }
}

impl FromStr for Stabilizer {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "projected" | "p" => Ok(Stabilizer::Projected),
            "plain" | "unprojected" | "u" => Ok(Stabilizer::Plain),
            other => Err(WgError::Config(format!(
                "unknown stabilizer '{other}' (expected 'projected' or 'plain')"
            ))),
        }
    }
}

/// Quadrature used for the discrete operators and for data (sources,
/// initial values, exact solutions in error norms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureOrders {
    /// Polynomial exactness of the triangle rule for element matrices.
    pub triangle_exactness: usize,
    /// Gauss points per edge for element matrices.
    pub edge_points: usize,
    pub data_triangle_exactness: usize,
    pub data_edge_points: usize,
}

impl QuadratureOrders {
    pub fn for_degrees(k: usize, j: usize, l: usize) -> Self {
        let tri = (2 * k).max(2 * l).max(k + l) + 2;
        let edge = k.max(j).max(l) + 2;
        QuadratureOrders {
            triangle_exactness: tri.min(MAX_TRIANGLE_EXACTNESS),
            edge_points: edge.min(MAX_GAUSS_POINTS),
            data_triangle_exactness: (tri + 4).min(MAX_TRIANGLE_EXACTNESS),
            data_edge_points: (edge + 2).min(MAX_GAUSS_POINTS),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v, min, max) in [
            ("triangle exactness", self.triangle_exactness, 0, MAX_TRIANGLE_EXACTNESS),
            ("data triangle exactness", self.data_triangle_exactness, 0, MAX_TRIANGLE_EXACTNESS),
            ("edge points", self.edge_points, 1, MAX_GAUSS_POINTS),
            ("data edge points", self.data_edge_points, 1, MAX_GAUSS_POINTS),
        ] {
            if !(min..=max).contains(&v) {
                return Err(WgError::QuadratureOutOfRange(format!("{name} = {v} (allowed {min}..={max})")));
            }
        }
        Ok(())
    }
}

/// The element family `(P_k(K), P_j(∂K), [P_l(K)]²)` and its stabilizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WgConfig {
    pub k: usize,
    pub j: usize,
    pub l: usize,
    pub stabilizer: Stabilizer,
    pub quadrature: QuadratureOrders,
}

impl WgConfig {
    pub fn new(k: usize, j: usize, l: usize, stabilizer: Stabilizer) -> Result<Self> {
        let cfg = WgConfig {
            k,
            j,
            l,
            stabilizer,
            quadrature: QuadratureOrders::for_degrees(k, j, l),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureOrders) -> Result<Self> {
        self.quadrature = quadrature;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(WgError::Config("interior degree k must be at least 1".into()));
        }
        if self.k.max(self.j).max(self.l) > 8 {
            return Err(WgError::Config(format!(
                "degrees ({}, {}, {}) exceed the supported maximum 8",
                self.k, self.j, self.l
            )));
        }
        self.quadrature.validate()
    }

    /// Degree of the edge projection used by the projected stabilizer.
    pub fn m(&self) -> usize {
        self.j.max(self.l)
    }

    /// `(k, j, l)` formatted as in table headings.
    pub fn label(&self) -> String {
        format!("({},{},{})", self.k, self.j, self.l)
    }
}
