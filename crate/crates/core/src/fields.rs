//! Analytic scalar and vector fields with hand-coded derivatives.
//!
//! Gradients follow the row convention `grad[i][j] = ∂u_i/∂x_j`, so
//! `(∇u) w` is the matrix-vector product `grad · w`.

use std::fmt;
use std::sync::Arc;

use crate::elements::Mat2;
use crate::mesh::Point;

pub trait ScalarField: Send + Sync {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
    fn laplacian(&self, x: Point) -> f64;
}

pub trait VectorField: Send + Sync {
    fn value(&self, x: Point) -> [f64; 2];
    fn gradient(&self, x: Point) -> Mat2;
    fn laplacian(&self, x: Point) -> [f64; 2];

    fn divergence(&self, x: Point) -> f64 {
        let g = self.gradient(x);
        g[0][0] + g[1][1]
    }
}

type SFn<T> = Arc<dyn Fn(Point) -> T + Send + Sync>;

/// Scalar field assembled from closures. Missing derivatives panic when
/// requested.
#[derive(Clone)]
pub struct ScalarFn {
    value: SFn<f64>,
    gradient: Option<SFn<[f64; 2]>>,
    laplacian: Option<SFn<f64>>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").finish_non_exhaustive()
    }
}

impl ScalarFn {
    pub fn new(
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
        laplacian: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarFn {
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
            laplacian: Some(Arc::new(laplacian)),
        }
    }

    pub fn value_only(value: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn { value: Arc::new(value), gradient: None, laplacian: None }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| [0.0; 2], |_| 0.0)
    }
}

impl ScalarField for ScalarFn {
    fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        (self.gradient.as_ref().expect("scalar field has no gradient"))(x)
    }
    fn laplacian(&self, x: Point) -> f64 {
        (self.laplacian.as_ref().expect("scalar field has no Laplacian"))(x)
    }
}

/// Vector field assembled from closures.
#[derive(Clone)]
pub struct VectorFn {
    value: SFn<[f64; 2]>,
    gradient: Option<SFn<Mat2>>,
    laplacian: Option<SFn<[f64; 2]>>,
}

impl fmt::Debug for VectorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFn").finish_non_exhaustive()
    }
}

impl VectorFn {
    pub fn new(
        value: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
        gradient: impl Fn(Point) -> Mat2 + Send + Sync + 'static,
        laplacian: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        VectorFn {
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
            laplacian: Some(Arc::new(laplacian)),
        }
    }

    pub fn value_only(value: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        VectorFn { value: Arc::new(value), gradient: None, laplacian: None }
    }

    /// `u(x) = A x + b`.
    pub fn affine(a: Mat2, b: [f64; 2]) -> Self {
        Self::new(
            move |x| [a[0][0] * x[0] + a[0][1] * x[1] + b[0], a[1][0] * x[0] + a[1][1] * x[1] + b[1]],
            move |_| a,
            |_| [0.0; 2],
        )
    }

    pub fn constant(c: [f64; 2]) -> Self {
        Self::affine([[0.0; 2]; 2], c)
    }

    /// `s · u`.
    pub fn scaled(u: Arc<dyn VectorField>, s: f64) -> Self {
        let (u1, u2, u3) = (u.clone(), u.clone(), u);
        Self::new(
            move |x| u1.value(x).map(|v| s * v),
            move |x| u2.gradient(x).map(|r| r.map(|v| s * v)),
            move |x| u3.laplacian(x).map(|v| s * v),
        )
    }

    /// `u - w`.
    pub fn difference(u: Arc<dyn VectorField>, w: Arc<dyn VectorField>) -> Self {
        let (u1, u2, u3) = (u.clone(), u.clone(), u);
        let (w1, w2, w3) = (w.clone(), w.clone(), w);
        Self::new(
            move |x| {
                let (a, b) = (u1.value(x), w1.value(x));
                [a[0] - b[0], a[1] - b[1]]
            },
            move |x| {
                let (a, b) = (u2.gradient(x), w2.gradient(x));
                [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
            },
            move |x| {
                let (a, b) = (u3.laplacian(x), w3.laplacian(x));
                [a[0] - b[0], a[1] - b[1]]
            },
        )
    }
}

impl VectorField for VectorFn {
    fn value(&self, x: Point) -> [f64; 2] {
        (self.value)(x)
    }
    fn gradient(&self, x: Point) -> Mat2 {
        (self.gradient.as_ref().expect("vector field has no gradient"))(x)
    }
    fn laplacian(&self, x: Point) -> [f64; 2] {
        (self.laplacian.as_ref().expect("vector field has no Laplacian"))(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_and_combinators() {
        let u: Arc<dyn VectorField> = Arc::new(VectorFn::affine([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]));
        let w: Arc<dyn VectorField> = Arc::new(VectorFn::constant([2.0, 3.0]));
        let d = VectorFn::difference(u.clone(), w);
        assert_eq!(d.value([1.0, 1.0]), [-1.0, -4.0]);
        assert_eq!(d.divergence([0.3, 0.2]), 0.0);
        let s = VectorFn::scaled(u, 0.5);
        assert_eq!(s.gradient([0.0, 0.0]), [[0.5, 0.0], [0.0, -0.5]]);
    }

    #[test]
    #[should_panic(expected = "no gradient")]
    fn value_only_has_no_gradient() {
        ScalarFn::value_only(|x| x[0]).gradient([0.0, 0.0]);
    }
}
