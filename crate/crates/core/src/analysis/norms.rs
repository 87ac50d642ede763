use crate::elements::{default_quad_degree, quadrature_rule, FeFunction};
use crate::error::{invalid, Result};
use crate::forms::{tau_stab, QuadPoint};

use super::cases::ManufacturedCase;

/// Errors of a discrete pair against a manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub e0_w: f64,
    pub e1_w: f64,
    pub e0_p: f64,
    pub e_triple: f64,
}

/// `‖w − w_h‖₀`, `|w − w_h|₁`, `‖p − p_h‖₀` (means matched) and the triple
/// norm of the error with convection `a_scale·w + u_m`.
pub fn error_norms(w_h: &FeFunction, p_h: &FeFunction, case: &ManufacturedCase, quad_degree: Option<usize>) -> Result<ErrorNorms> {
    let v = w_h.space();
    if !v.same_mesh(p_h.space()) {
        return Err(invalid!("velocity and pressure live on different meshes"));
    }
    let mesh = v.mesh();
    let rule = quadrature_rule(quad_degree.unwrap_or_else(|| default_quad_degree(v.degree())))?;
    // mean difference
    let (mut dp, mut area) = (0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let g = v.geometry(c);
        for (&xi, &wq) in rule.points().iter().zip(rule.weights()) {
            let x = g.map(xi);
            dp += wq * g.det * (case.p.value(x) - p_h.evaluate(c, xi).value[0]);
            area += wq * g.det;
        }
    }
    let shift = dp / area;
    let prm = &case.params;
    let mut out = ErrorNorms::default();
    let mut triple = 0.0;
    for c in 0..mesh.num_cells() {
        let g = v.geometry(c);
        let tau = tau_stab(mesh.cell_diameters()[c], prm);
        for (&xi, &wq) in rule.points().iter().zip(rule.weights()) {
            let x = g.map(xi);
            let dx = wq * g.det;
            let eh = w_h.evaluate(c, xi);
            let w = case.w.value(x);
            let gw = case.w.gradient(x);
            let ew = [w[0] - eh.value[0], w[1] - eh.value[1]];
            let mut eg = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    eg[i][j] = gw[i][j] - eh.grad[i][j];
                }
            }
            let ep = case.p.value(x) - p_h.evaluate(c, xi).value[0] - shift;
            let gp = case.p.gradient(x);
            let gph = p_h.evaluate(c, xi).grad[0];
            let egp = [gp[0] - gph[0], gp[1] - gph[1]];
            let e0 = ew[0] * ew[0] + ew[1] * ew[1];
            let e1: f64 = eg.iter().flatten().map(|v| v * v).sum();
            out.e0_w += dx * e0;
            out.e1_w += dx * e1;
            out.e0_p += dx * ep * ep;
            let (um, gm) = case.u_m.value_grad(&QuadPoint { cell: c, xi, x });
            let b = [case.a_scale * w[0] + um[0], case.a_scale * w[1] + um[1]];
            let mut l = [0.0; 2];
            for i in 0..2 {
                l[i] = prm.rho * (gm[i][0] * ew[0] + gm[i][1] * ew[1])
                    + prm.rho * (eg[i][0] * b[0] + eg[i][1] * b[1])
                    + egp[i];
            }
            let div = eg[0][0] + eg[1][1];
            triple += dx
                * (prm.sigma * e0 + prm.mu * e1 + prm.lambda * div * div + tau * (l[0] * l[0] + l[1] * l[1]));
        }
    }
    out.e0_w = out.e0_w.sqrt();
    out.e1_w = out.e1_w.sqrt();
    out.e0_p = out.e0_p.sqrt();
    out.e_triple = triple.max(0.0).sqrt();
    Ok(out)
}

/// `‖p − p_h‖₀` after matching means, for an arbitrary scalar field.
pub fn pressure_error(p_h: &FeFunction, p: &dyn crate::fields::ScalarField, quad_degree: Option<usize>) -> Result<f64> {
    let s = p_h.space();
    let rule = quadrature_rule(quad_degree.unwrap_or_else(|| default_quad_degree(s.degree())))?;
    let mesh = s.mesh();
    let mut vals = Vec::new();
    let (mut mean, mut area) = (0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let g = s.geometry(c);
        for (&xi, &wq) in rule.points().iter().zip(rule.weights()) {
            let d = p.value(g.map(xi)) - p_h.evaluate(c, xi).value[0];
            mean += wq * g.det * d;
            area += wq * g.det;
            vals.push((wq * g.det, d));
        }
    }
    mean /= area;
    Ok(vals.iter().map(|(w, d)| w * (d - mean) * (d - mean)).sum::<f64>().sqrt())
}
