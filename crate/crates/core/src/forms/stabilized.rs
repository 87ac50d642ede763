use std::sync::Arc;

use super::assembly::{assemble_cells, CellBlock};
use super::data::{ProblemData, QuadPoint, VectorCoef};
use super::params::{tau_stab, PhysParams};
use super::system::{apply_constraints, LinearSystem};
use crate::elements::{default_quad_degree, quadrature_rule, FeFunction, FeSpace, Mat2, QuadratureRule, MAX_NODES};
use crate::error::{invalid, Result};
use crate::par::ExecMode;
use crate::sparse::CsrMatrix;

/// Which parts of the bilinear form are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub galerkin: bool,
    pub convection: bool,
    pub pressure_stab: bool,
    /// Keep the `μΔ` terms inside the residual stabilization.
    pub stab_laplacian: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Terms { galerkin: true, convection: true, pressure_stab: true, stab_laplacian: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssemblyOptions {
    /// Quadrature exactness; `None` means `2k + 3`.
    pub quad_degree: Option<usize>,
    pub terms: Terms,
    pub mode: ExecMode,
}

impl AssemblyOptions {
    pub fn rule(&self, k: usize) -> Result<QuadratureRule> {
        quadrature_rule(self.quad_degree.unwrap_or_else(|| default_quad_degree(k)))
    }
}

fn check_spaces(v: &FeSpace, q: &FeSpace) -> Result<()> {
    if v.components() != 2 || q.components() != 1 {
        return Err(invalid!("expected a vector velocity space and a scalar pressure space"));
    }
    if !v.same_mesh(q) || v.degree() != q.degree() {
        return Err(invalid!("velocity and pressure spaces must share mesh and degree"));
    }
    Ok(())
}

/// Physical basis data on one cell at one quadrature point.
struct PhysPoint {
    n: usize,
    phi: [f64; MAX_NODES],
    grad: [[f64; 2]; MAX_NODES],
    lap: [f64; MAX_NODES],
}

/// Coefficients of the residual operator at a quadrature point.
struct Coefs {
    gm: Mat2,
    b: [f64; 2],
    div_a: f64,
}

fn coefs(data_um: &VectorCoef, data_ah: &VectorCoef, qp: &QuadPoint) -> Coefs {
    let (um, gm) = data_um.value_grad(qp);
    let (ah, ga) = data_ah.value_grad(qp);
    Coefs { gm, b: [ah[0] + um[0], ah[1] + um[1]], div_a: ga[0][0] + ga[1][1] }
}

/// Per-cell loop state shared by the stabilized kernels.
struct CellLoop<'a> {
    v: &'a FeSpace,
    q: &'a FeSpace,
    rule: QuadratureRule,
    tab: crate::elements::Tabulation,
}

impl<'a> CellLoop<'a> {
    fn new(v: &'a FeSpace, q: &'a FeSpace, rule: QuadratureRule) -> Self {
        let tab = v.element().tabulate(rule.points());
        CellLoop { v, q, rule, tab }
    }

    fn dofs(&self, c: usize, out: &mut Vec<usize>) {
        let ns = self.v.num_scalar_dofs();
        let nv = self.v.num_dofs();
        let vd = self.v.cell_dofs(c);
        for comp in 0..2 {
            out.extend(vd.iter().map(|&d| comp * ns + d));
        }
        out.extend(self.q.cell_dofs(c).iter().map(|&d| nv + d));
    }

    /// Calls `f(qp, basis, weight)` for each quadrature point of cell `c`.
    fn for_points(&self, c: usize, laplacian: bool, mut f: impl FnMut(&QuadPoint, &PhysPoint, f64)) {
        let g = self.v.geometry(c);
        for (k, (&xi, &w)) in self.rule.points().iter().zip(self.rule.weights()).enumerate() {
            let b = &self.tab.at[k];
            let mut pp = PhysPoint { n: b.n, phi: b.values, grad: [[0.0; 2]; MAX_NODES], lap: [0.0; MAX_NODES] };
            for i in 0..b.n {
                pp.grad[i] = g.grad(b.grads[i]);
                if laplacian {
                    pp.lap[i] = g.laplacian(b.hessians[i]);
                }
            }
            let qp = QuadPoint { cell: c, xi, x: g.map(xi) };
            f(&qp, &pp, w * g.det);
        }
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Residual-operator vectors for each unknown (field, node). `sign` is +1
/// for the trial residual `σw − μΔw + L` and −1 for the test residual
/// `−σv + μΔv + L`; `with_reaction = false` gives `L` alone.
fn residual_vectors(
    p: &PhysParams,
    c: &Coefs,
    pp: &PhysPoint,
    sign: f64,
    with_reaction: bool,
    out: &mut [[[f64; 2]; MAX_NODES]; 3],
) {
    for j in 0..pp.n {
        let conv = p.rho * dot(pp.grad[j], c.b);
        let diag = if with_reaction { sign * (p.sigma * pp.phi[j] - p.mu * pp.lap[j]) + conv } else { conv };
        for comp in 0..2 {
            let mut r = [p.rho * c.gm[0][comp] * pp.phi[j], p.rho * c.gm[1][comp] * pp.phi[j]];
            r[comp] += diag;
            out[comp][j] = r;
        }
        out[2][j] = pp.grad[j];
    }
}

/// Assembles the stabilized matrix and load vector without constraints.
/// The pressure mass vector is filled so constraints can be applied later.
pub fn assemble_stabilized_raw(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
) -> Result<LinearSystem> {
    check_spaces(v, q)?;
    p.validate()?;
    data.check(v.mesh())?;
    let mesh = v.mesh();
    let lp = CellLoop::new(v, q, opts.rule(v.degree())?);
    let nv = v.num_dofs();
    let np = q.num_dofs();
    let t = opts.terms;
    let kernel = |c: usize, blk: &mut CellBlock| -> Result<()> {
        let n = v.nodes_per_cell();
        let m = 3 * n;
        blk.reset(m);
        lp.dofs(c, &mut blk.dofs);
        let tau = tau_stab(mesh.cell_diameters()[c], p);
        let mut rv = [[[0.0; 2]; MAX_NODES]; 3];
        let mut tv = [[[0.0; 2]; MAX_NODES]; 3];
        lp.for_points(c, t.stab_laplacian, |qp, pp, w| {
            let co = coefs(&data.u_m, &data.a_h, qp);
            let f = data.f.value(qp);
            let g = data.g.value(qp);
            let (mat, rhs) = (&mut blk.mat, &mut blk.rhs);
            if t.galerkin || t.convection {
                for i in 0..n {
                    for j in 0..n {
                        let mass = pp.phi[i] * pp.phi[j];
                        let mut diag = 0.0;
                        if t.galerkin {
                            diag += p.sigma * mass + p.mu * dot(pp.grad[i], pp.grad[j]);
                        }
                        if t.convection {
                            diag += p.rho * dot(pp.grad[j], co.b) * pp.phi[i] + 0.5 * p.rho * co.div_a * mass;
                        }
                        for d in 0..2 {
                            for cc in 0..2 {
                                let mut val = if cc == d { diag } else { 0.0 };
                                if t.galerkin {
                                    val += p.rho * co.gm[d][cc] * mass + p.lambda * pp.grad[j][cc] * pp.grad[i][d];
                                }
                                mat[(d * n + i) * m + cc * n + j] += w * val;
                            }
                        }
                        if t.galerkin {
                            for d in 0..2 {
                                mat[(d * n + i) * m + 2 * n + j] -= w * pp.phi[j] * pp.grad[i][d];
                                mat[(2 * n + i) * m + d * n + j] += w * pp.phi[i] * pp.grad[j][d];
                            }
                        }
                    }
                }
                if t.galerkin {
                    for i in 0..n {
                        for d in 0..2 {
                            rhs[d * n + i] += w * (f[d] * pp.phi[i] + p.lambda * g * pp.grad[i][d]);
                        }
                        rhs[2 * n + i] += w * pp.phi[i] * g;
                    }
                }
            }
            if t.pressure_stab {
                residual_vectors(p, &co, pp, 1.0, true, &mut rv);
                residual_vectors(p, &co, pp, -1.0, true, &mut tv);
                let wt = w * tau;
                for fi in 0..3 {
                    for i in 0..n {
                        let row = (fi * n + i) * m;
                        let ti = tv[fi][i];
                        for fj in 0..3 {
                            for j in 0..n {
                                mat[row + fj * n + j] += wt * dot(rv[fj][j], ti);
                            }
                        }
                        rhs[fi * n + i] += wt * dot(f, ti);
                    }
                }
            }
        });
        Ok(())
    };
    let (matrix, rhs) = assemble_cells(mesh.num_cells(), nv + np, opts.mode, true, kernel)?;
    Ok(LinearSystem {
        matrix,
        rhs,
        n_velocity: nv,
        n_pressure: np,
        pressure_mass: pressure_mass(q, &lp.rule),
        dirichlet: Vec::new(),
        mean_constraint: false,
    })
}

/// `∫ φ_q` for every scalar basis function of `q`.
pub fn pressure_mass(q: &FeSpace, rule: &QuadratureRule) -> Vec<f64> {
    let tab = q.element().tabulate(rule.points());
    let mut m = vec![0.0; q.num_dofs()];
    for c in 0..q.mesh().num_cells() {
        let det = q.geometry(c).det;
        for (k, &w) in rule.weights().iter().enumerate() {
            for (i, &d) in q.cell_dofs(c).iter().enumerate() {
                m[d] += w * det * tab.at[k].values[i];
            }
        }
    }
    m
}

/// Dirichlet list setting every boundary velocity dof from `data.boundary`.
pub fn velocity_dirichlet(v: &FeSpace, data: &ProblemData) -> Vec<(usize, f64)> {
    let ns = v.num_scalar_dofs();
    let mut out = Vec::new();
    for comp in 0..2 {
        for i in v.all_boundary_dofs() {
            out.push((comp * ns + i, data.boundary.value(v.dof_coords()[i])[comp]));
        }
    }
    out
}

/// Assembles and constrains: velocity Dirichlet on the whole boundary and
/// zero-mean pressure through a bordered multiplier.
pub fn assemble_stabilized(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
) -> Result<LinearSystem> {
    let raw = assemble_stabilized_raw(v, q, p, data, opts)?;
    apply_constraints(raw, &velocity_dirichlet(v, data), true)
}

/// Gram matrix of the triple norm over `[velocity | pressure]`.
pub fn assemble_triple_norm_gram(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
) -> Result<CsrMatrix> {
    check_spaces(v, q)?;
    data.check(v.mesh())?;
    let mesh = v.mesh();
    let lp = CellLoop::new(v, q, opts.rule(v.degree())?);
    let kernel = |c: usize, blk: &mut CellBlock| -> Result<()> {
        let n = v.nodes_per_cell();
        let m = 3 * n;
        blk.reset(m);
        lp.dofs(c, &mut blk.dofs);
        let tau = tau_stab(mesh.cell_diameters()[c], p);
        let mut lv = [[[0.0; 2]; MAX_NODES]; 3];
        lp.for_points(c, false, |qp, pp, w| {
            let co = coefs(&data.u_m, &data.a_h, qp);
            residual_vectors(p, &co, pp, 1.0, false, &mut lv);
            for i in 0..n {
                for j in 0..n {
                    let diag = p.sigma * pp.phi[i] * pp.phi[j] + p.mu * dot(pp.grad[i], pp.grad[j]);
                    for d in 0..2 {
                        for cc in 0..2 {
                            let mut val = p.lambda * pp.grad[j][cc] * pp.grad[i][d];
                            if cc == d {
                                val += diag;
                            }
                            blk.mat[(d * n + i) * m + cc * n + j] += w * val;
                        }
                    }
                }
            }
            for fi in 0..3 {
                for i in 0..n {
                    for fj in 0..3 {
                        for j in 0..n {
                            blk.mat[(fi * n + i) * m + fj * n + j] += w * tau * dot(lv[fi][i], lv[fj][j]);
                        }
                    }
                }
            }
        });
        Ok(())
    };
    let (g, _) = assemble_cells(mesh.num_cells(), v.num_dofs() + q.num_dofs(), opts.mode, true, kernel)?;
    Ok(g)
}

/// `|||(w, p)|||²` by direct quadrature.
pub fn triple_norm_sq(
    w: &FeFunction,
    pr: &FeFunction,
    p: &PhysParams,
    u_m: &VectorCoef,
    a_h: &VectorCoef,
    quad_degree: Option<usize>,
) -> Result<f64> {
    let v = w.space();
    let mesh = v.mesh();
    let rule = quadrature_rule(quad_degree.unwrap_or_else(|| default_quad_degree(v.degree())))?;
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        let g = v.geometry(c);
        let tau = tau_stab(mesh.cell_diameters()[c], p);
        for (&xi, &wq) in rule.points().iter().zip(rule.weights()) {
            let qp = QuadPoint { cell: c, xi, x: g.map(xi) };
            let co = coefs(u_m, a_h, &qp);
            let e = w.evaluate(c, xi);
            let gp = pr.evaluate(c, xi).grad[0];
            let mut l = [0.0; 2];
            for (r, lr) in l.iter_mut().enumerate() {
                *lr = p.rho * (co.gm[r][0] * e.value[0] + co.gm[r][1] * e.value[1])
                    + p.rho * (e.grad[r][0] * co.b[0] + e.grad[r][1] * co.b[1])
                    + gp[r];
            }
            let div = e.grad[0][0] + e.grad[1][1];
            let grad2: f64 = e.grad.iter().flatten().map(|x| x * x).sum();
            total += wq
                * g.det
                * (p.sigma * dot(e.value, e.value) + p.mu * grad2 + p.lambda * div * div + tau * dot(l, l));
        }
    }
    Ok(total)
}

/// Largest max-row-sum norm of the coefficient gradient over quadrature
/// points.
pub fn grad_inf_norm(u: &VectorCoef, v: &FeSpace, quad_degree: Option<usize>) -> Result<f64> {
    if u.is_zero() {
        return Ok(0.0);
    }
    u.check(v.mesh(), "u_m", true)?;
    let rule = quadrature_rule(quad_degree.unwrap_or_else(|| default_quad_degree(v.degree())))?;
    let mut best = 0.0f64;
    for c in 0..v.mesh().num_cells() {
        let g = v.geometry(c);
        for &xi in rule.points() {
            let (_, gr) = u.value_grad(&QuadPoint { cell: c, xi, x: g.map(xi) });
            let norm = (gr[0][0].abs() + gr[0][1].abs()).max(gr[1][0].abs() + gr[1][1].abs());
            best = best.max(norm);
        }
    }
    Ok(best)
}
