//! Polynomial bases on triangles and edges, and the quadrature rules that
//! integrate against them.

mod basis;
mod quadrature;

pub use basis::{legendre_values, poly_dim, EdgeBasis, TriBasis};
pub use quadrature::{
    gauss_rule, triangle_rule, LineRule, QuadratureRule, TriangleRule, MAX_GAUSS_POINTS,
    MAX_TRIANGLE_EXACTNESS,
};

#[allow(unused_imports)]
pub(crate) use quadrature::gauss_legendre;
