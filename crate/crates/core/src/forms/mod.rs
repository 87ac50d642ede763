//! Assembly of the stabilized scheme, the triple-norm Gram matrix and the
//! channel Navier-Stokes operators.

mod assembly;
mod data;
mod navier_stokes;
mod params;
mod stabilized;
mod system;

pub use data::{BoundaryValues, ProblemData, QuadPoint, ScalarCoef, ScalarPointFn, VectorCoef, VectorPointFn};
pub use navier_stokes::{assemble_coarse_ns, assemble_taylor_hood, channel_dirichlet, parabolic_inlet, ChannelParams};
pub use params::{tau_stab, PhysParams};
pub use stabilized::{
    assemble_stabilized, assemble_stabilized_raw, assemble_triple_norm_gram, grad_inf_norm, pressure_mass,
    triple_norm_sq, velocity_dirichlet, AssemblyOptions, Terms,
};
pub use system::{apply_constraints, LinearSystem};

use crate::error::Result;
use crate::sparse::{write_matrix_market, write_vector_market};

/// Writes `matrix.mtx` and `rhs.mtx` into `dir`.
pub fn dump_system(sys: &LinearSystem, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let m = std::io::BufWriter::new(std::fs::File::create(dir.join("matrix.mtx"))?);
    write_matrix_market(m, &sys.matrix)?;
    let r = std::io::BufWriter::new(std::fs::File::create(dir.join("rhs.mtx"))?);
    write_vector_market(r, &sys.rhs)
}
