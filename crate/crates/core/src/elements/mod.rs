//! Lagrange P_k elements on triangles, quadrature, dof maps, and finite
//! element functions.

mod function;
mod quadrature;
mod reference;
mod space;

pub use function::{interpolate_scalar, interpolate_vector, FeFunction, PointEval};
pub use quadrature::{gauss_legendre, quadrature_rule, QuadratureRule, MAX_QUADRATURE_DEGREE};
pub use reference::{reference_basis, BasisAt, RefElement, Tabulation, MAX_DEGREE, MAX_NODES};
pub use space::{build_space, CellGeometry, FeSpace, Mat2};

/// Default quadrature exactness for forms of degree-`k` elements.
pub fn default_quad_degree(k: usize) -> usize {
    (2 * k + 3).min(MAX_QUADRATURE_DEGREE)
}
