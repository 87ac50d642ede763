use std::sync::Arc;

use super::space::{FeSpace, Mat2};
use crate::error::{invalid, Result};
use crate::fields::{ScalarField, VectorField};
use crate::mesh::{Point, PointLocator};

/// Value, physical gradient and Laplacian of an FE function at one point.
/// Scalar functions only fill component 0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointEval {
    pub value: [f64; 2],
    pub grad: Mat2,
    pub laplacian: [f64; 2],
}

/// Coefficient vector over an [`FeSpace`].
#[derive(Debug, Clone)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.num_dofs();
        FeFunction { space, coeffs: vec![0.0; n] }
    }

    pub fn from_coeffs(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.num_dofs() {
            return Err(invalid!(
                "coefficient length {} does not match {} dofs",
                coeffs.len(),
                space.num_dofs()
            ));
        }
        Ok(FeFunction { space, coeffs })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Evaluates on cell `cell` at reference point `xi`.
    pub fn evaluate(&self, cell: usize, xi: [f64; 2]) -> PointEval {
        let s = &*self.space;
        let b = s.element().eval(xi);
        let g = s.geometry(cell);
        let dofs = s.cell_dofs(cell);
        let ns = s.num_scalar_dofs();
        let mut out = PointEval::default();
        for (i, &d) in dofs.iter().enumerate() {
            let grad = g.grad(b.grads[i]);
            let lap = g.laplacian(b.hessians[i]);
            for c in 0..s.components() {
                let v = self.coeffs[c * ns + d];
                out.value[c] += v * b.values[i];
                out.grad[c][0] += v * grad[0];
                out.grad[c][1] += v * grad[1];
                out.laplacian[c] += v * lap;
            }
        }
        out
    }

    /// Evaluates at a physical point, or `None` outside the mesh.
    pub fn evaluate_at(&self, locator: &PointLocator, x: Point) -> Option<PointEval> {
        locator
            .locate(self.space.mesh(), x)
            .map(|(c, xi)| self.evaluate(c, xi))
    }

    /// Mean over the domain (component 0).
    pub fn mean(&self, quad_degree: usize) -> Result<f64> {
        let rule = super::quadrature_rule(quad_degree)?;
        let mesh = self.space.mesh();
        let (mut integral, mut area) = (0.0, 0.0);
        for c in 0..mesh.num_cells() {
            let det = self.space.geometry(c).det;
            for (p, w) in rule.points().iter().zip(rule.weights()) {
                integral += w * det * self.evaluate(c, *p).value[0];
                area += w * det;
            }
        }
        Ok(integral / area)
    }
}

/// Nodal interpolant of a scalar field.
pub fn interpolate_scalar(field: &dyn ScalarField, space: &Arc<FeSpace>) -> Result<FeFunction> {
    if space.components() != 1 {
        return Err(invalid!("scalar interpolation needs a scalar space"));
    }
    let coeffs = space.dof_coords().iter().map(|&x| field.value(x)).collect();
    FeFunction::from_coeffs(space.clone(), coeffs)
}

/// Nodal interpolant of a vector field.
pub fn interpolate_vector(field: &dyn VectorField, space: &Arc<FeSpace>) -> Result<FeFunction> {
    if space.components() != 2 {
        return Err(invalid!("vector interpolation needs a 2-component space"));
    }
    let ns = space.num_scalar_dofs();
    let mut coeffs = vec![0.0; 2 * ns];
    for (i, &x) in space.dof_coords().iter().enumerate() {
        let v = field.value(x);
        coeffs[i] = v[0];
        coeffs[ns + i] = v[1];
    }
    FeFunction::from_coeffs(space.clone(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{build_space, quadrature_rule};
    use crate::fields::{ScalarFn, VectorFn};
    use crate::mesh::{build_rect_tri_mesh, Pattern, TriMesh};

    fn mesh(n: usize, pattern: Pattern) -> Arc<TriMesh> {
        Arc::new(build_rect_tri_mesh([0.0, 1.0, 0.0, 1.0], n, n, pattern, false).unwrap())
    }

    #[test]
    fn constant_interpolates_to_constant_coefficients() {
        for k in 1..=3 {
            let s = build_space(mesh(2, Pattern::CrissCross), k, 1).unwrap();
            let f = interpolate_scalar(&ScalarFn::constant(2.5), &s).unwrap();
            assert!(f.coeffs().iter().all(|&c| c == 2.5));
        }
    }

    #[test]
    fn linear_vector_field_is_reproduced() {
        let u = VectorFn::affine([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]);
        let s = build_space(mesh(3, Pattern::Right), 1, 2).unwrap();
        let f = interpolate_vector(&u, &s).unwrap();
        let q = quadrature_rule(5).unwrap();
        for c in 0..s.mesh().num_cells() {
            let g = s.geometry(c);
            for &p in q.points() {
                let e = f.evaluate(c, p);
                let x = g.map(p);
                assert!((e.value[0] - x[0]).abs() < 1e-12 && (e.value[1] + x[1]).abs() < 1e-12);
                assert!((e.grad[0][0] - 1.0).abs() < 1e-12 && (e.grad[1][1] + 1.0).abs() < 1e-12);
                assert!(e.grad[0][1].abs() < 1e-12 && e.grad[1][0].abs() < 1e-12);
                assert_eq!(e.laplacian, [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn p2_laplacian_of_quadratic_is_four() {
        let f = ScalarFn::value_only(|x| x[0] * x[0] + x[1] * x[1]);
        let s = build_space(mesh(3, Pattern::CrissCross), 2, 1).unwrap();
        let fh = interpolate_scalar(&f, &s).unwrap();
        for c in 0..s.mesh().num_cells() {
            let e = fh.evaluate(c, [0.2, 0.3]);
            assert!((e.laplacian[0] - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomials_up_to_degree_k_are_exact() {
        // x^a y^b with a+b <= k, values/gradients/Laplacians at quadrature points.
        let m = Arc::new(build_rect_tri_mesh([-0.5, 1.5, 0.0, 2.0], 3, 2, Pattern::CrissCross, false).unwrap());
        let q = quadrature_rule(6).unwrap();
        for k in 1..=3 {
            let s = build_space(m.clone(), k, 1).unwrap();
            for a in 0..=k as i32 {
                for b in 0..=(k as i32 - a) {
                    let pw = |x: f64, n: i32| if n < 0 { 0.0 } else { x.powi(n) };
                    let fh = interpolate_scalar(&ScalarFn::value_only(move |x| pw(x[0], a) * pw(x[1], b)), &s).unwrap();
                    let (af, bf) = (a as f64, b as f64);
                    for c in 0..m.num_cells() {
                        let g = s.geometry(c);
                        for &p in q.points() {
                            let x = g.map(p);
                            let e = fh.evaluate(c, p);
                            let v = pw(x[0], a) * pw(x[1], b);
                            let gx = af * pw(x[0], a - 1) * pw(x[1], b);
                            let gy = bf * pw(x[0], a) * pw(x[1], b - 1);
                            let lap = af * (af - 1.0) * pw(x[0], a - 2) * pw(x[1], b)
                                + bf * (bf - 1.0) * pw(x[0], a) * pw(x[1], b - 2);
                            assert!((e.value[0] - v).abs() < 1e-11);
                            assert!((e.grad[0][0] - gx).abs() < 1e-11 && (e.grad[0][1] - gy).abs() < 1e-11);
                            assert!((e.laplacian[0] - lap).abs() < 1e-9, "k={k} a={a} b={b}");
                        }
                    }
                }
            }
        }
    }

    fn l2_interp_error(n: usize) -> f64 {
        let f = ScalarFn::value_only(|x| (std::f64::consts::PI * x[0]).sin());
        let s = build_space(mesh(n, Pattern::Right), 1, 1).unwrap();
        let fh = interpolate_scalar(&f, &s).unwrap();
        let q = quadrature_rule(8).unwrap();
        let mut e2 = 0.0;
        for c in 0..s.mesh().num_cells() {
            let g = s.geometry(c);
            for (p, w) in q.points().iter().zip(q.weights()) {
                let d = fh.evaluate(c, *p).value[0] - f.value(g.map(*p));
                e2 += w * g.det * d * d;
            }
        }
        e2.sqrt()
    }

    #[test]
    fn p1_interpolation_error_ratio_is_four() {
        let ratio = l2_interp_error(8) / l2_interp_error(16);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn coefficient_length_is_checked() {
        let s = build_space(mesh(1, Pattern::Right), 1, 1).unwrap();
        assert!(FeFunction::from_coeffs(s, vec![0.0; 3]).is_err());
    }
}
