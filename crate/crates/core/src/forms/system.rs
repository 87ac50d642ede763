use std::collections::BTreeMap;

use crate::error::{invalid, Result};
use crate::sparse::{CsrMatrix, Triplets};

/// Assembled system with its block layout
/// `[velocity | pressure | optional mean multiplier]`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// `∫ φ_q` for every pressure basis function.
    pub pressure_mass: Vec<f64>,
    pub dirichlet: Vec<(usize, f64)>,
    pub mean_constraint: bool,
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn velocity<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.n_velocity]
    }

    pub fn pressure<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.n_velocity..self.n_velocity + self.n_pressure]
    }
}

/// Eliminates Dirichlet dofs symmetrically (lifting the rhs; their rows
/// become identity rows) and optionally borders the system with the
/// pressure mean row and column.
pub fn apply_constraints(sys: LinearSystem, dirichlet: &[(usize, f64)], mean_constraint: bool) -> Result<LinearSystem> {
    let n = sys.matrix.nrows();
    if sys.mean_constraint || !sys.dirichlet.is_empty() {
        return Err(invalid!("constraints were already applied"));
    }
    let mut fixed: BTreeMap<usize, f64> = BTreeMap::new();
    for &(i, v) in dirichlet {
        if i >= n {
            return Err(invalid!("Dirichlet dof {i} out of range 0..{n}"));
        }
        fixed.insert(i, v);
    }
    if fixed.is_empty() && !mean_constraint {
        return Ok(sys);
    }
    let mut value = vec![None; n];
    for (&i, &v) in &fixed {
        value[i] = Some(v);
    }
    let size = n + usize::from(mean_constraint);
    let mut rhs = sys.rhs.clone();
    rhs.resize(size, 0.0);
    let mut t = Triplets::with_capacity(sys.matrix.nnz() + 2 * sys.n_pressure + n);
    for i in 0..n {
        if let Some(v) = value[i] {
            t.push(i, i, 1.0);
            rhs[i] = v;
            continue;
        }
        let (c, a) = sys.matrix.row(i);
        for (&j, &aij) in c.iter().zip(a) {
            match value[j] {
                Some(v) => rhs[i] -= aij * v,
                None => t.push(i, j, aij),
            }
        }
    }
    if mean_constraint {
        for (k, &m) in sys.pressure_mass.iter().enumerate() {
            let j = sys.n_velocity + k;
            if value[j].is_none() {
                t.push(n, j, m);
                t.push(j, n, m);
            }
        }
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::from_triplets(size, size, &t)?,
        rhs,
        dirichlet: fixed.into_iter().collect(),
        mean_constraint,
        ..sys
    })
}
