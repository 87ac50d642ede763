use std::fmt;
use std::sync::Arc;

use crate::elements::{FeFunction, Mat2};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::mesh::{Point, TriMesh};

/// A quadrature point: cell, reference coordinates and physical position.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub cell: usize,
    pub xi: [f64; 2],
    pub x: Point,
}

pub type VectorPointFn = Arc<dyn Fn(&QuadPoint) -> [f64; 2] + Send + Sync>;
pub type ScalarPointFn = Arc<dyn Fn(&QuadPoint) -> f64 + Send + Sync>;

/// A vector coefficient in the forms.
#[derive(Clone, Default)]
pub enum VectorCoef {
    #[default]
    Zero,
    Analytic(Arc<dyn VectorField>),
    Discrete(FeFunction),
    /// Value-only data evaluated per quadrature point (e.g. cellwise sources).
    Pointwise(VectorPointFn),
}

impl fmt::Debug for VectorCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorCoef::Zero => write!(f, "Zero"),
            VectorCoef::Analytic(_) => write!(f, "Analytic"),
            VectorCoef::Discrete(u) => write!(f, "Discrete({} dofs)", u.coeffs().len()),
            VectorCoef::Pointwise(_) => write!(f, "Pointwise"),
        }
    }
}

impl VectorCoef {
    pub fn is_zero(&self) -> bool {
        matches!(self, VectorCoef::Zero)
    }

    /// Checks that the coefficient can be evaluated on `mesh`.
    pub fn check(&self, mesh: &Arc<TriMesh>, name: &str, need_grad: bool) -> Result<()> {
        match self {
            VectorCoef::Discrete(u) => {
                if !Arc::ptr_eq(u.space().mesh(), mesh) {
                    return Err(Error::Data(format!("{name} lives on a different mesh")));
                }
                if u.space().components() != 2 {
                    return Err(Error::Data(format!("{name} must be a vector function")));
                }
            }
            VectorCoef::Pointwise(_) if need_grad => {
                return Err(Error::Data(format!("{name} needs a gradient but is value-only")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn value(&self, q: &QuadPoint) -> [f64; 2] {
        match self {
            VectorCoef::Zero => [0.0; 2],
            VectorCoef::Analytic(u) => u.value(q.x),
            VectorCoef::Discrete(u) => u.evaluate(q.cell, q.xi).value,
            VectorCoef::Pointwise(f) => f(q),
        }
    }

    pub fn value_grad(&self, q: &QuadPoint) -> ([f64; 2], Mat2) {
        match self {
            VectorCoef::Zero => ([0.0; 2], [[0.0; 2]; 2]),
            VectorCoef::Analytic(u) => (u.value(q.x), u.gradient(q.x)),
            VectorCoef::Discrete(u) => {
                let e = u.evaluate(q.cell, q.xi);
                (e.value, e.grad)
            }
            VectorCoef::Pointwise(_) => panic!("value-only coefficient has no gradient"),
        }
    }
}

/// A scalar coefficient in the forms.
#[derive(Clone, Default)]
pub enum ScalarCoef {
    #[default]
    Zero,
    Analytic(Arc<dyn ScalarField>),
    Discrete(FeFunction),
    Pointwise(ScalarPointFn),
}

impl fmt::Debug for ScalarCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarCoef::Zero => write!(f, "Zero"),
            ScalarCoef::Analytic(_) => write!(f, "Analytic"),
            ScalarCoef::Discrete(u) => write!(f, "Discrete({} dofs)", u.coeffs().len()),
            ScalarCoef::Pointwise(_) => write!(f, "Pointwise"),
        }
    }
}

impl ScalarCoef {
    pub fn check(&self, mesh: &Arc<TriMesh>, name: &str) -> Result<()> {
        if let ScalarCoef::Discrete(u) = self {
            if !Arc::ptr_eq(u.space().mesh(), mesh) || u.space().components() != 1 {
                return Err(Error::Data(format!("{name} must be a scalar function on the assembly mesh")));
            }
        }
        Ok(())
    }

    pub fn value(&self, q: &QuadPoint) -> f64 {
        match self {
            ScalarCoef::Zero => 0.0,
            ScalarCoef::Analytic(u) => u.value(q.x),
            ScalarCoef::Discrete(u) => u.evaluate(q.cell, q.xi).value[0],
            ScalarCoef::Pointwise(f) => f(q),
        }
    }
}

/// Velocity boundary values.
#[derive(Clone, Default)]
pub enum BoundaryValues {
    #[default]
    Zero,
    Analytic(Arc<dyn VectorField>),
}

impl fmt::Debug for BoundaryValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryValues::Zero => write!(f, "Zero"),
            BoundaryValues::Analytic(_) => write!(f, "Analytic"),
        }
    }
}

impl BoundaryValues {
    pub fn value(&self, x: Point) -> [f64; 2] {
        match self {
            BoundaryValues::Zero => [0.0; 2],
            BoundaryValues::Analytic(u) => u.value(x),
        }
    }
}

/// Data of the perturbed Oseen problem.
#[derive(Debug, Clone, Default)]
pub struct ProblemData {
    pub u_m: VectorCoef,
    pub a_h: VectorCoef,
    pub f: VectorCoef,
    pub g: ScalarCoef,
    pub boundary: BoundaryValues,
}

impl ProblemData {
    pub fn check(&self, mesh: &Arc<TriMesh>) -> Result<()> {
        self.u_m.check(mesh, "u_m", true)?;
        self.a_h.check(mesh, "a_h", true)?;
        self.f.check(mesh, "f", false)?;
        self.g.check(mesh, "g")
    }
}
