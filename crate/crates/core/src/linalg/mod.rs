//! Dense and sparse linear algebra used by the solver: element-level dense
//! kernels, CSR operators, sparse Cholesky with fill-reducing orderings, and
//! conjugate gradients as a cross-check.

mod cg;
mod cholesky;
mod dense;
mod ordering;
mod sparse;

pub use cg::cg_solve;
pub use cholesky::{factorize, factorize_with, Factorization, PIVOT_RELATIVE_TOL};
pub use dense::{DenseCholesky, DenseMatrix};
pub use ordering::{compute_ordering, Ordering};
pub use sparse::{dot, norm2, CsrMatrix, TripletBuilder};

/// Alias used at the assembly boundary: every global operator is a square
/// CSR matrix over the free degrees of freedom.
pub type SparseOperator = CsrMatrix;
