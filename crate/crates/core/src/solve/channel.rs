use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};

use super::linear::{LinearSolver, SolverOptions};
use super::oseen::PicardOptions;
use super::report::SolveReport;
use crate::elements::{build_space, FeFunction, FeSpace};
use crate::error::Result;
use crate::forms::{assemble_coarse_ns, assemble_taylor_hood, ChannelParams, LinearSystem, VectorCoef};
use crate::mesh::{Point, TriMesh};
use crate::par::ExecMode;
use crate::sparse::norm2;

#[derive(Debug, Clone)]
pub struct ChannelSolution {
    pub u: FeFunction,
    pub p: FeFunction,
    pub report: SolveReport,
}

type Assembler = fn(
    &Arc<FeSpace>,
    &Arc<FeSpace>,
    &ChannelParams,
    &dyn Fn(Point) -> [f64; 2],
    &VectorCoef,
    ExecMode,
) -> Result<LinearSystem>;

#[allow(clippy::too_many_arguments)]
fn channel_picard(
    v: Arc<FeSpace>,
    q: Arc<FeSpace>,
    prm: &ChannelParams,
    inlet: &dyn Fn(Point) -> [f64; 2],
    picard: PicardOptions,
    solver_opts: SolverOptions,
    mode: ExecMode,
    assemble: Assembler,
) -> Result<ChannelSolution> {
    let t0 = Instant::now();
    let mut solver = LinearSolver::new(solver_opts).with_factor_reuse();
    let nv = v.num_dofs();
    let mut u = FeFunction::zeros(v.clone());
    let mut p = FeFunction::zeros(q.clone());
    let mut report = SolveReport {
        iterations: 0,
        final_update_norm: f64::INFINITY,
        final_residual: 0.0,
        converged: false,
        wall_time: 0.0,
    };
    for it in 1..=picard.max_iter {
        let sys = assemble(&v, &q, prm, inlet, &VectorCoef::Discrete(u.clone()), mode)?;
        let (x, res) = solver.solve(&sys)?;
        let du: Vec<f64> = x[..nv].iter().zip(u.coeffs()).map(|(a, b)| a - b).collect();
        let scale = norm2(&x[..nv]).max(1e-300);
        let upd = norm2(&du) / scale;
        u = FeFunction::from_coeffs(v.clone(), x[..nv].to_vec())?;
        p = FeFunction::from_coeffs(q.clone(), x[nv..nv + q.num_dofs()].to_vec())?;
        info!("channel picard {it}: relative update {upd:.3e}");
        report.iterations = it;
        report.final_update_norm = upd;
        report.final_residual = res;
        if upd <= picard.tol || norm2(&x[..nv]) == 0.0 {
            report.converged = true;
            report.final_update_norm = if norm2(&x[..nv]) == 0.0 { 0.0 } else { upd };
            break;
        }
    }
    if !report.converged {
        warn!("channel Picard iteration did not converge in {} iterations", picard.max_iter);
    }
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(ChannelSolution { u, p, report })
}

/// Coarse residual-stabilized P1/P1 Navier-Stokes solve. The update norm
/// is the relative Euclidean norm of the velocity increment.
pub fn solve_coarse_ns(
    mesh: &Arc<TriMesh>,
    prm: &ChannelParams,
    inlet: &dyn Fn(Point) -> [f64; 2],
    picard: PicardOptions,
    solver: SolverOptions,
    mode: ExecMode,
) -> Result<ChannelSolution> {
    let v = build_space(mesh.clone(), 1, 2)?;
    let q = build_space(mesh.clone(), 1, 1)?;
    channel_picard(v, q, prm, inlet, picard, solver, mode, assemble_coarse_ns)
}

/// Taylor-Hood P2/P1 reference solve.
pub fn solve_taylor_hood_ns(
    mesh: &Arc<TriMesh>,
    prm: &ChannelParams,
    inlet: &dyn Fn(Point) -> [f64; 2],
    picard: PicardOptions,
    solver: SolverOptions,
    mode: ExecMode,
) -> Result<ChannelSolution> {
    let v = build_space(mesh.clone(), 2, 2)?;
    let q = build_space(mesh.clone(), 1, 1)?;
    channel_picard(v, q, prm, inlet, picard, solver, mode, assemble_taylor_hood)
}

/// Velocity flux `∫ u·n` through the vertical line `x = x0`, sampled with a
/// composite Gauss rule.
pub fn flux_through(u: &FeFunction, locator: &crate::mesh::PointLocator, x0: f64, y0: f64, y1: f64, n: usize) -> f64 {
    let gl = crate::elements::gauss_legendre(4);
    let h = (y1 - y0) / n as f64;
    let mut total = 0.0;
    for s in 0..n {
        for (t, w) in gl.0.iter().zip(&gl.1) {
            let y = y0 + (s as f64 + t) * h;
            if let Some(e) = u.evaluate_at(locator, [x0, y]) {
                total += w * h * e.value[0];
            }
        }
    }
    total
}
