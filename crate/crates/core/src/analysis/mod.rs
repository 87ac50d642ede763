//! Manufactured solutions, error norms, convergence studies and the
//! property suite.

mod cases;
mod convergence;
mod norms;
mod properties;

pub use cases::{make_kovasznay_case, make_polynomial_case, make_trig_case, ManufacturedCase, ZetaVariant};
pub use convergence::{rate, run_convergence_study, ConvergenceRecord, LevelRecord, StudyOptions, CSV_HEADER};
pub use norms::{error_norms, pressure_error, ErrorNorms};
pub use properties::{
    c_inv_cell, c_inv_mesh, c_inv_reference, coercivity_dense, coercivity_random, delta_certified,
    generalized_extreme_eigen, interpolation_rates, laplacian_term_difference, property_suite, skew_coupling,
    tau_bounds, trilinear_residual, PropertyLedger, PropertyResult,
};
