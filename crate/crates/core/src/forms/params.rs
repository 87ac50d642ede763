use crate::error::{invalid, Result};

/// Coefficients of the stabilized scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub mu: f64,
    pub rho: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl PhysParams {
    pub fn new(mu: f64, rho: f64, sigma: f64, lambda: f64, delta: f64) -> Result<Self> {
        let p = PhysParams { mu, rho, sigma, lambda, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu),
            ("rho", self.rho),
            ("sigma", self.sigma),
            ("lambda", self.lambda),
            ("delta", self.delta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }

    /// Upper bound on `delta` for the coercivity estimate given `C_inv`.
    pub fn delta_bound(c_inv: f64) -> f64 {
        let inv = if c_inv > 0.0 { 1.0 / (c_inv * c_inv) } else { f64::INFINITY };
        0.25 * 0.5f64.min(inv)
    }
}

/// `δ h² / (σ h² + μ)`.
#[inline]
pub fn tau_stab(h: f64, p: &PhysParams) -> f64 {
    let h2 = h * h;
    p.delta * h2 / (p.sigma * h2 + p.mu)
}
