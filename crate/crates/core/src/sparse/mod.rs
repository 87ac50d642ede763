//! Sparse matrices and the direct and iterative solvers built on them.

mod csr;
mod gmres;
mod ilu;
mod lu;
mod mm;
mod ordering;

pub use csr::{dot, norm2, relative_residual, CsrMatrix, Triplets};
pub use gmres::{gmres, GmresOptions, Preconditioner};
pub use ilu::Ilu0;
pub use lu::{SparseLu, Symbolic};
pub use mm::{read_matrix_market, write_matrix_market, write_vector_market};
pub use ordering::{nested_dissection, nested_dissection_grouped};
