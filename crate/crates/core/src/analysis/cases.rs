//! Manufactured solutions with hand-coded derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::elements::{interpolate_vector, FeSpace};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, ScalarFn, VectorField, VectorFn};
use crate::forms::{BoundaryValues, PhysParams, ProblemData, QuadPoint, ScalarCoef, VectorCoef};
use crate::solve::NonlinearData;

/// Choice of the Kovasznay exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZetaVariant {
    /// `(1/2μ) √(1/4μ² + 4π²)`.
    Paper,
    /// `1/(2μ) − √(1/4μ² + 4π²)`.
    #[default]
    Standard,
}

impl ZetaVariant {
    pub fn zeta(self, mu: f64) -> f64 {
        let r = (0.25 / (mu * mu) + 4.0 * PI * PI).sqrt();
        match self {
            ZetaVariant::Paper => r / (2.0 * mu),
            ZetaVariant::Standard => 0.5 / mu - r,
        }
    }
}

impl FromStr for ZetaVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(ZetaVariant::Paper),
            "standard" => Ok(ZetaVariant::Standard),
            _ => Err(Error::Config(format!("unknown zeta variant '{s}'"))),
        }
    }
}

impl fmt::Display for ZetaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZetaVariant::Paper => "paper",
            ZetaVariant::Standard => "standard",
        })
    }
}

/// Exact `(w, p)` with measured velocity `u_m` and convection `a = a_scale·w`.
/// The forcing `f` and divergence datum `g = ∇·w` are derived from the
/// momentum and continuity equations.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub params: PhysParams,
    pub w: Arc<dyn VectorField>,
    pub p: Arc<dyn ScalarField>,
    pub u_m: VectorCoef,
    pub a_scale: f64,
    /// Rectangle `[x0, x1, y0, y1]` for cases posed on one.
    pub domain: Option<[f64; 4]>,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("a_scale", &self.a_scale)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ManufacturedCase {
    /// `σw − μΔw + ρ(∇u_m)w + ρ(∇w)(a + u_m) + ∇p` with `a = scale·w`.
    pub fn momentum(&self, x: [f64; 2], um: [f64; 2], gm: [[f64; 2]; 2], scale: f64) -> [f64; 2] {
        let p = &self.params;
        let w = self.w.value(x);
        let gw = self.w.gradient(x);
        let lw = self.w.laplacian(x);
        let gp = self.p.gradient(x);
        let b = [scale * w[0] + um[0], scale * w[1] + um[1]];
        let mut f = [0.0; 2];
        for i in 0..2 {
            f[i] = p.sigma * w[i] - p.mu * lw[i]
                + p.rho * (gm[i][0] * w[0] + gm[i][1] * w[1])
                + p.rho * (gw[i][0] * b[0] + gw[i][1] * b[1])
                + gp[i];
        }
        f
    }

    /// Forcing for convection `a = scale·w`, evaluated per quadrature point
    /// so that discrete `u_m` is handled too.
    pub fn forcing(&self, scale: f64) -> VectorCoef {
        let case = self.clone();
        VectorCoef::Pointwise(Arc::new(move |qp: &QuadPoint| {
            let (um, gm) = case.u_m.value_grad(qp);
            case.momentum(qp.x, um, gm, scale)
        }))
    }

    pub fn divergence(&self) -> ScalarCoef {
        let w = self.w.clone();
        ScalarCoef::Analytic(Arc::new(ScalarFn::value_only(move |x| w.divergence(x))))
    }

    pub fn boundary(&self) -> BoundaryValues {
        BoundaryValues::Analytic(self.w.clone())
    }

    /// Data of the linear scheme with `a_h = a_scale · I_h(w)`.
    pub fn linear_data(&self, v: &Arc<FeSpace>) -> Result<ProblemData> {
        let mut a_h = interpolate_vector(&*self.w, v)?;
        a_h.coeffs_mut().iter_mut().for_each(|c| *c *= self.a_scale);
        Ok(ProblemData {
            u_m: self.u_m.clone(),
            a_h: VectorCoef::Discrete(a_h),
            f: self.forcing(self.a_scale),
            g: self.divergence(),
            boundary: self.boundary(),
        })
    }

    /// Data of the nonlinear scheme, where the convection is `w` itself.
    pub fn nonlinear_data(&self) -> NonlinearData {
        NonlinearData { u_m: self.u_m.clone(), f: self.forcing(1.0), g: self.divergence(), boundary: self.boundary(), load: None }
    }

    pub fn with_u_m(mut self, u_m: VectorCoef) -> Self {
        self.u_m = u_m;
        self
    }
}

/// Kovasznay-type perturbation on `(−1/2, 3/2) × (0, 2)` with
/// `u = (x, −y)`, `u_m = u − w`, `a = 0.9 w`, `λ = 0.5`, `δ = 0.001`.
pub fn make_kovasznay_case(mu: f64, rho: f64, sigma: f64, variant: ZetaVariant) -> Result<ManufacturedCase> {
    let params = PhysParams::new(mu, rho, sigma, 0.5, 0.001)?;
    let z = variant.zeta(mu);
    let k = 2.0 * PI;
    let w: Arc<dyn VectorField> = Arc::new(VectorFn::new(
        move |x| {
            let e = (z * x[0]).exp();
            [1.0 - e * (k * x[1]).cos(), z / k * e * (k * x[1]).sin()]
        },
        move |x| {
            let e = (z * x[0]).exp();
            let (c, s) = ((k * x[1]).cos(), (k * x[1]).sin());
            [[-z * e * c, k * e * s], [z * z / k * e * s, z * e * c]]
        },
        move |x| {
            let e = (z * x[0]).exp();
            let (c, s) = ((k * x[1]).cos(), (k * x[1]).sin());
            [(k * k - z * z) * e * c, z / k * (z * z - k * k) * e * s]
        },
    ));
    let shift = ((3.0 * z).exp() - (-z).exp()) / (8.0 * z);
    let p: Arc<dyn ScalarField> = Arc::new(ScalarFn::new(
        move |x| 0.5 * (2.0 * z * x[0]).exp() - shift,
        move |x| [z * (2.0 * z * x[0]).exp(), 0.0],
        move |x| 2.0 * z * z * (2.0 * z * x[0]).exp(),
    ));
    let u: Arc<dyn VectorField> = Arc::new(VectorFn::affine([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]));
    let u_m = VectorCoef::Analytic(Arc::new(VectorFn::difference(u, w.clone())));
    Ok(ManufacturedCase {
        name: format!("kovasznay-{variant}-mu{mu}"),
        params,
        w,
        p,
        u_m,
        a_scale: 0.9,
        domain: Some([-0.5, 1.5, 0.0, 2.0]),
    })
}

/// Trigonometric pair `w = (π cos πy sin πx, −π cos πx sin πy)`,
/// `p = cos πx cos πy`, `a = 0.9 w`. `u_m` starts at zero and is usually
/// replaced with measured data via [`ManufacturedCase::with_u_m`].
pub fn make_trig_case(params: PhysParams) -> ManufacturedCase {
    let w: Arc<dyn VectorField> = Arc::new(VectorFn::new(
        |x| {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            [PI * cy * sx, -PI * cx * sy]
        },
        |x| {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            let q = PI * PI;
            [[q * cy * cx, -q * sy * sx], [q * sx * sy, -q * cx * cy]]
        },
        |x| {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            let q = -2.0 * PI * PI;
            [q * PI * cy * sx, -q * PI * cx * sy]
        },
    ));
    let p: Arc<dyn ScalarField> = Arc::new(ScalarFn::new(
        |x| (PI * x[0]).cos() * (PI * x[1]).cos(),
        |x| {
            [
                -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                -PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
            ]
        },
        |x| -2.0 * PI * PI * (PI * x[0]).cos() * (PI * x[1]).cos(),
    ));
    ManufacturedCase {
        name: "trig".into(),
        params,
        w,
        p,
        u_m: VectorCoef::Zero,
        a_scale: 0.9,
        domain: None,
    }
}

/// Polynomial pair on the unit square: `w = (y², −x²)`, `p = x + y − 1`,
/// `u_m = (x, −y)`, `a = 0.9 w`. It lies in P2 × P1, so every scheme with
/// `k ≥ 2` reproduces it.
pub fn make_polynomial_case(params: PhysParams) -> ManufacturedCase {
    let w: Arc<dyn VectorField> = Arc::new(VectorFn::new(
        |x| [x[1] * x[1], -x[0] * x[0]],
        |x| [[0.0, 2.0 * x[1]], [-2.0 * x[0], 0.0]],
        |_| [2.0, -2.0],
    ));
    let p: Arc<dyn ScalarField> = Arc::new(ScalarFn::new(|x| x[0] + x[1] - 1.0, |_| [1.0, 1.0], |_| 0.0));
    ManufacturedCase {
        name: "polynomial".into(),
        params,
        w,
        p,
        u_m: VectorCoef::Analytic(Arc::new(VectorFn::affine([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]))),
        a_scale: 0.9,
        domain: Some([0.0, 1.0, 0.0, 1.0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_check(case: &ManufacturedCase, lo: [f64; 2], hi: [f64; 2]) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        for _ in 0..200 {
            let x = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
            let at = |dx: f64, dy: f64| case.w.value([x[0] + dx, x[1] + dy]);
            let g = case.w.gradient(x);
            let l = case.w.laplacian(x);
            let scale = 1.0 + case.w.value(x).iter().map(|v| v.abs()).sum::<f64>();
            for i in 0..2 {
                let dx = (at(h, 0.0)[i] - at(-h, 0.0)[i]) / (2.0 * h);
                let dy = (at(0.0, h)[i] - at(0.0, -h)[i]) / (2.0 * h);
                let lap = (at(h, 0.0)[i] + at(-h, 0.0)[i] + at(0.0, h)[i] + at(0.0, -h)[i] - 4.0 * at(0.0, 0.0)[i])
                    / (h * h);
                let tol = 1e-6 * scale * 100.0;
                assert!((dx - g[i][0]).abs() < tol, "{} d/dx {dx} vs {}", case.name, g[i][0]);
                assert!((dy - g[i][1]).abs() < tol);
                assert!((lap - l[i]).abs() < 1e-3 * scale * 100.0, "{} lap {lap} vs {}", case.name, l[i]);
            }
            let pf = |dx: f64, dy: f64| case.p.value([x[0] + dx, x[1] + dy]);
            let gp = case.p.gradient(x);
            assert!(((pf(h, 0.0) - pf(-h, 0.0)) / (2.0 * h) - gp[0]).abs() < 1e-6 * (1.0 + gp[0].abs()) * 100.0);
            assert!(((pf(0.0, h) - pf(0.0, -h)) / (2.0 * h) - gp[1]).abs() < 1e-6 * (1.0 + gp[1].abs()) * 100.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for mu in [1.0, 0.1, 0.01, 0.001] {
            fd_check(&make_kovasznay_case(mu, 1.0, 1.0, ZetaVariant::Standard).unwrap(), [-0.5, 0.0], [1.5, 2.0]);
        }
        fd_check(&make_kovasznay_case(1.0, 1.0, 1.0, ZetaVariant::Paper).unwrap(), [-0.5, 0.0], [1.5, 2.0]);
        let prm = PhysParams::new(0.0483, 1.119, 5.37, 0.5, 0.5).unwrap();
        fd_check(&make_trig_case(prm), [-2.0, -3.0], [3.0, 2.0]);
        fd_check(&make_polynomial_case(prm), [0.0, 0.0], [1.0, 1.0]);
    }

    #[test]
    fn zeta_values() {
        let z = ZetaVariant::Standard.zeta(1.0);
        assert!((z - (0.5 - (0.25 + 4.0 * PI * PI).sqrt())).abs() < 1e-15);
        assert!((z + 5.80305).abs() < 1e-4);
        assert!(ZetaVariant::Paper.zeta(1.0) > 0.0);
        assert_eq!("PAPER".parse::<ZetaVariant>().unwrap(), ZetaVariant::Paper);
    }

    #[test]
    fn kovasznay_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for variant in [ZetaVariant::Standard, ZetaVariant::Paper] {
            let case = make_kovasznay_case(1.0, 1.0, 1.0, variant).unwrap();
            for _ in 0..100 {
                let x = [rng.random_range(-0.5..1.5), rng.random_range(0.0..2.0)];
                let qp = QuadPoint { cell: 0, xi: [0.0; 2], x };
                let um = case.u_m.value(&qp);
                let w = case.w.value(x);
                assert!((um[0] + w[0] - x[0]).abs() < 1e-12 && (um[1] + w[1] + x[1]).abs() < 1e-12);
                assert!(case.w.divergence(x).abs() < 1e-10 * (1.0 + w[1].abs()));
            }
        }
    }

    #[test]
    fn trig_amplitude_and_divergence() {
        let case = make_trig_case(PhysParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let w = case.w.value(x);
            assert!(w[0].abs() <= PI && w[1].abs() <= PI);
            assert!(case.w.divergence(x).abs() < 1e-12);
        }
    }
}
