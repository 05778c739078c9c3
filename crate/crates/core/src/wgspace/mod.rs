//! The weak Galerkin space `V_h⁰`: degree-of-freedom layout, L² projections,
//! the discrete weak gradient and the two stabilizers.

mod coefficient;
mod config;
mod dofs;
mod element;
mod field;
mod space;

#[cfg(test)]
mod tests;

pub use coefficient::{apply, Coefficient, Tensor};
pub use config::{QuadratureOrders, Stabilizer, WgConfig};
pub use dofs::{DofMap, DofOwner};
pub use element::{
    element_operators, mass_matrix, solve_weak_gradient, stabilizer_matrix, weak_gradient_rhs,
    weak_gradient_rhs_by_parts, weighted_vector_mass, ElementFrame, ElementOperators, ElementRules, LocalEdge,
};
pub use field::WeakField;
pub use space::WgSpace;
