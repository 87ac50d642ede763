//! Picard-linearized Navier-Stokes operators for the channel flow: the
//! coarse residual-stabilized P1/P1 form and the Taylor-Hood P2/P1
//! reference form.

use std::sync::Arc;

use super::assembly::{assemble_cells, CellBlock};
use super::data::{QuadPoint, VectorCoef};
use super::system::{apply_constraints, LinearSystem};
use crate::elements::{default_quad_degree, quadrature_rule, FeSpace, MAX_NODES};
use crate::error::{invalid, Result};
use crate::mesh::{Marker, Point};
use crate::par::ExecMode;

/// Channel flow parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub mu: f64,
    pub rho: f64,
    pub sigma: f64,
}

impl ChannelParams {
    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.rho > 0.0 && self.sigma >= 0.0) {
            return Err(invalid!("channel parameters need mu, rho > 0 and sigma >= 0"));
        }
        Ok(())
    }
}

/// Inlet profile `1 − ((y − 0.5)/0.5)²` scaled by `amplitude`.
pub fn parabolic_inlet(amplitude: f64) -> impl Fn(Point) -> [f64; 2] + Send + Sync + Clone {
    move |x: Point| {
        let s = (x[1] - 0.5) / 0.5;
        [amplitude * (1.0 - s * s), 0.0]
    }
}

fn check_channel(v: &FeSpace, q: &FeSpace) -> Result<()> {
    let mesh = v.mesh();
    if !v.same_mesh(q) || v.components() != 2 || q.components() != 1 {
        return Err(invalid!("velocity and pressure spaces must share the mesh"));
    }
    if !mesh.has_marker(Marker::Inlet) || !mesh.has_marker(Marker::Outlet) {
        return Err(invalid!("channel mesh needs INLET and OUTLET markers"));
    }
    Ok(())
}

/// Velocity Dirichlet values: inlet profile on INLET, zero on WALL.
pub fn channel_dirichlet(v: &FeSpace, inlet: &dyn Fn(Point) -> [f64; 2]) -> Vec<(usize, f64)> {
    let ns = v.num_scalar_dofs();
    let mut out = Vec::new();
    for (i, m) in v.boundary_markers().iter().enumerate() {
        let val = match m {
            Some(Marker::Wall) => [0.0; 2],
            Some(Marker::Inlet) => inlet(v.dof_coords()[i]),
            _ => continue,
        };
        out.push((i, val[0]));
        out.push((ns + i, val[1]));
    }
    out.sort_by_key(|e| e.0);
    out
}

fn ns_dofs(v: &FeSpace, q: &FeSpace, c: usize, out: &mut Vec<usize>) {
    let ns = v.num_scalar_dofs();
    let nv = v.num_dofs();
    for comp in 0..2 {
        out.extend(v.cell_dofs(c).iter().map(|&d| comp * ns + d));
    }
    out.extend(q.cell_dofs(c).iter().map(|&d| nv + d));
}

/// Linearized coarse operator with convection field `conv`:
/// `σ(u,v) + μ(∇u,∇v) + ((∇u)a,v) − (p,∇·v) + ρ(∇·u,r)
///  + Σ_K H_K²/(2μ) (σu + (∇u)a + ∇p − Δu, ∇r)_K`.
/// Both spaces must be P1.
pub fn assemble_coarse_ns(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    prm: &ChannelParams,
    inlet: &dyn Fn(Point) -> [f64; 2],
    conv: &VectorCoef,
    mode: ExecMode,
) -> Result<LinearSystem> {
    check_channel(v, q)?;
    prm.validate()?;
    if v.degree() != 1 || q.degree() != 1 {
        return Err(invalid!("the coarse solve uses P1/P1"));
    }
    conv.check(v.mesh(), "convection field", false)?;
    let mesh = v.mesh();
    let rule = quadrature_rule(default_quad_degree(1))?;
    let tab = v.element().tabulate(rule.points());
    let kernel = |c: usize, blk: &mut CellBlock| -> Result<()> {
        let n = 3;
        let m = 9;
        blk.reset(m);
        ns_dofs(v, q, c, &mut blk.dofs);
        let g = v.geometry(c);
        let hk = mesh.cell_diameters()[c];
        let wk = hk * hk / (2.0 * prm.mu);
        for (k, (&xi, &wq)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let b = &tab.at[k];
            let w = wq * g.det;
            let a = conv.value(&QuadPoint { cell: c, xi, x: g.map(xi) });
            let mut gr = [[0.0; 2]; MAX_NODES];
            let mut lap = [0.0; MAX_NODES];
            for i in 0..n {
                gr[i] = g.grad(b.grads[i]);
                lap[i] = g.laplacian(b.hessians[i]);
            }
            let phi = &b.values;
            for i in 0..n {
                for j in 0..n {
                    let adv = gr[j][0] * a[0] + gr[j][1] * a[1];
                    let diag = prm.sigma * phi[i] * phi[j]
                        + prm.mu * (gr[i][0] * gr[j][0] + gr[i][1] * gr[j][1])
                        + adv * phi[i];
                    for d in 0..2 {
                        blk.mat[(d * n + i) * m + d * n + j] += w * diag;
                        blk.mat[(d * n + i) * m + 2 * n + j] -= w * phi[j] * gr[i][d];
                        let stab = wk * (prm.sigma * phi[j] + adv - lap[j]) * gr[i][d];
                        blk.mat[(2 * n + i) * m + d * n + j] += w * (prm.rho * phi[i] * gr[j][d] + stab);
                    }
                    blk.mat[(2 * n + i) * m + 2 * n + j] +=
                        w * wk * (gr[i][0] * gr[j][0] + gr[i][1] * gr[j][1]);
                }
            }
        }
        Ok(())
    };
    let nv = v.num_dofs();
    let np = q.num_dofs();
    let (matrix, rhs) = assemble_cells(mesh.num_cells(), nv + np, mode, true, kernel)?;
    let raw = LinearSystem {
        matrix,
        rhs,
        n_velocity: nv,
        n_pressure: np,
        pressure_mass: vec![0.0; np],
        dirichlet: Vec::new(),
        mean_constraint: false,
    };
    apply_constraints(raw, &channel_dirichlet(v, inlet), false)
}

/// Linearized Taylor-Hood operator
/// `σ(u,v) + μ(∇u,∇v) + ρ((∇u)a,v) − (p,∇·v) + (q,∇·u)`
/// with `v` P2 and `q` P1 on the same mesh.
pub fn assemble_taylor_hood(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    prm: &ChannelParams,
    inlet: &dyn Fn(Point) -> [f64; 2],
    conv: &VectorCoef,
    mode: ExecMode,
) -> Result<LinearSystem> {
    check_channel(v, q)?;
    prm.validate()?;
    if v.degree() != 2 || q.degree() != 1 {
        return Err(invalid!("Taylor-Hood needs P2 velocity and P1 pressure"));
    }
    conv.check(v.mesh(), "convection field", false)?;
    let mesh = v.mesh();
    let rule = quadrature_rule(default_quad_degree(2))?;
    let tv = v.element().tabulate(rule.points());
    let tq = q.element().tabulate(rule.points());
    let kernel = |c: usize, blk: &mut CellBlock| -> Result<()> {
        let (n, nq) = (6, 3);
        let m = 2 * n + nq;
        blk.reset(m);
        ns_dofs(v, q, c, &mut blk.dofs);
        let g = v.geometry(c);
        for (k, (&xi, &wq)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let (b, bq) = (&tv.at[k], &tq.at[k]);
            let w = wq * g.det;
            let a = conv.value(&QuadPoint { cell: c, xi, x: g.map(xi) });
            let mut gr = [[0.0; 2]; MAX_NODES];
            for i in 0..n {
                gr[i] = g.grad(b.grads[i]);
            }
            let phi = &b.values;
            for i in 0..n {
                for j in 0..n {
                    let adv = gr[j][0] * a[0] + gr[j][1] * a[1];
                    let diag = prm.sigma * phi[i] * phi[j]
                        + prm.mu * (gr[i][0] * gr[j][0] + gr[i][1] * gr[j][1])
                        + prm.rho * adv * phi[i];
                    for d in 0..2 {
                        blk.mat[(d * n + i) * m + d * n + j] += w * diag;
                    }
                }
                for j in 0..nq {
                    for d in 0..2 {
                        let bij = w * bq.values[j] * gr[i][d];
                        blk.mat[(d * n + i) * m + 2 * n + j] -= bij;
                        blk.mat[(2 * n + j) * m + d * n + i] += bij;
                    }
                }
            }
        }
        Ok(())
    };
    let nv = v.num_dofs();
    let np = q.num_dofs();
    let (matrix, rhs) = assemble_cells(mesh.num_cells(), nv + np, mode, true, kernel)?;
    let raw = LinearSystem {
        matrix,
        rhs,
        n_velocity: nv,
        n_pressure: np,
        pressure_mass: vec![0.0; np],
        dirichlet: Vec::new(),
        mean_constraint: false,
    };
    apply_constraints(raw, &channel_dirichlet(v, inlet), false)
}
