use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};

use super::linear::{LinearSolver, SolverOptions};
use super::report::SolveReport;
use crate::elements::{build_space, FeFunction, FeSpace};
use crate::error::Result;
use crate::forms::{
    assemble_stabilized, grad_inf_norm, triple_norm_sq, AssemblyOptions, BoundaryValues, LinearSystem, PhysParams, ProblemData,
    ScalarCoef, VectorCoef,
};
use crate::mesh::TriMesh;

/// Result of the `σ > 4ρ‖∇u_m‖∞` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaCheck {
    pub satisfied: bool,
    pub margin: f64,
    pub grad_norm: f64,
}

impl SigmaCheck {
    pub fn to_key_value(&self) -> String {
        format!(
            "sigma_condition.satisfied={}\nsigma_condition.margin={:.6e}\nsigma_condition.grad_norm={:.6e}\n",
            self.satisfied, self.margin, self.grad_norm
        )
    }
}

/// Evaluates the condition with `‖∇u_m‖∞` sampled at quadrature points of
/// `v`'s mesh.
pub fn check_sigma_condition(p: &PhysParams, u_m: &VectorCoef, v: &FeSpace, quad_degree: Option<usize>) -> Result<SigmaCheck> {
    let grad_norm = grad_inf_norm(u_m, v, quad_degree)?;
    let margin = p.sigma - 4.0 * p.rho * grad_norm;
    Ok(SigmaCheck { satisfied: margin > 0.0, margin, grad_norm })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OseenOptions {
    pub assembly: AssemblyOptions,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone)]
pub struct OseenSolution {
    pub w: FeFunction,
    pub p: FeFunction,
    pub report: SolveReport,
}

/// Equal-order velocity and pressure spaces.
pub fn build_spaces(mesh: &Arc<TriMesh>, k: usize) -> Result<(Arc<FeSpace>, Arc<FeSpace>)> {
    Ok((build_space(mesh.clone(), k, 2)?, build_space(mesh.clone(), k, 1)?))
}

fn split(v: &Arc<FeSpace>, q: &Arc<FeSpace>, x: &[f64]) -> Result<(FeFunction, FeFunction)> {
    let nv = v.num_dofs();
    Ok((
        FeFunction::from_coeffs(v.clone(), x[..nv].to_vec())?,
        FeFunction::from_coeffs(q.clone(), x[nv..nv + q.num_dofs()].to_vec())?,
    ))
}

/// Assembles, constrains and solves the linear scheme on given spaces.
pub fn solve_oseen_on(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &OseenOptions,
    solver: &mut LinearSolver,
) -> Result<(FeFunction, FeFunction, f64)> {
    let sys = assemble_stabilized(v, q, p, data, &opts.assembly)?;
    let (x, res) = solver.solve(&sys)?;
    let (w, pr) = split(v, q, &x)?;
    Ok((w, pr, res))
}

fn warn_sigma(p: &PhysParams, u_m: &VectorCoef, v: &FeSpace, opts: &OseenOptions) -> Result<()> {
    let chk = check_sigma_condition(p, u_m, v, opts.assembly.quad_degree)?;
    if !chk.satisfied {
        warn!(
            "sigma = {} violates sigma > 4 rho |grad u_m| = {:.4} (margin {:.4}); proceeding",
            p.sigma,
            4.0 * p.rho * chk.grad_norm,
            chk.margin
        );
    }
    Ok(())
}

/// Solves the stabilized perturbed Oseen problem with degree-`k` elements.
pub fn solve_perturbed_oseen(
    mesh: &Arc<TriMesh>,
    k: usize,
    p: &PhysParams,
    data: &ProblemData,
    opts: &OseenOptions,
) -> Result<OseenSolution> {
    let t0 = Instant::now();
    let (v, q) = build_spaces(mesh, k)?;
    warn_sigma(p, &data.u_m, &v, opts)?;
    let mut solver = LinearSolver::new(opts.solver);
    let (w, pr, res) = solve_oseen_on(&v, &q, p, data, opts, &mut solver)?;
    Ok(OseenSolution {
        w,
        p: pr,
        report: SolveReport {
            iterations: 1,
            final_update_norm: 0.0,
            final_residual: res,
            converged: true,
            wall_time: t0.elapsed().as_secs_f64(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-6, max_iter: 50 }
    }
}

/// Data of the nonlinear problem; the convective field is the iterate.
#[derive(Debug, Clone, Default)]
pub struct NonlinearData {
    pub u_m: VectorCoef,
    pub f: VectorCoef,
    pub g: ScalarCoef,
    pub boundary: BoundaryValues,
    /// Assembled load over the velocity dofs, added to every row that is
    /// not a Dirichlet row.
    pub load: Option<Arc<Vec<f64>>>,
}

fn add_load(sys: &mut LinearSystem, load: &[f64]) -> Result<()> {
    if load.len() != sys.n_velocity {
        return Err(crate::error::invalid!("load has {} entries for {} velocity dofs", load.len(), sys.n_velocity));
    }
    let mut fixed = vec![false; sys.n_velocity];
    for &(i, _) in &sys.dirichlet {
        if i < sys.n_velocity {
            fixed[i] = true;
        }
    }
    for (i, &l) in load.iter().enumerate() {
        if !fixed[i] {
            sys.rhs[i] += l;
        }
    }
    Ok(())
}

/// Picard iteration with `a_h := w_h^{n−1}`, starting from zero. Stops
/// when the triple norm of the increment is at most `tol`.
pub fn picard_perturbed_ns(
    mesh: &Arc<TriMesh>,
    k: usize,
    p: &PhysParams,
    nl: &NonlinearData,
    picard: PicardOptions,
    opts: &OseenOptions,
) -> Result<OseenSolution> {
    if !(picard.tol > 0.0) || picard.max_iter == 0 {
        return Err(crate::error::invalid!("Picard needs tol > 0 and max_iter >= 1"));
    }
    let t0 = Instant::now();
    let (v, q) = build_spaces(mesh, k)?;
    warn_sigma(p, &nl.u_m, &v, opts)?;
    let mut solver = LinearSolver::new(opts.solver).with_factor_reuse();
    let mut w = FeFunction::zeros(v.clone());
    let mut pr = FeFunction::zeros(q.clone());
    let mut report = SolveReport {
        iterations: 0,
        final_update_norm: f64::INFINITY,
        final_residual: 0.0,
        converged: false,
        wall_time: 0.0,
    };
    for it in 1..=picard.max_iter {
        let data = ProblemData {
            u_m: nl.u_m.clone(),
            a_h: VectorCoef::Discrete(w.clone()),
            f: nl.f.clone(),
            g: nl.g.clone(),
            boundary: nl.boundary.clone(),
        };
        let mut sys = assemble_stabilized(&v, &q, p, &data, &opts.assembly)?;
        if let Some(load) = &nl.load {
            add_load(&mut sys, load)?;
        }
        let (x, res) = solver.solve(&sys)?;
        let (w_new, p_new) = split(&v, &q, &x)?;
        let dw: Vec<f64> = w_new.coeffs().iter().zip(w.coeffs()).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = p_new.coeffs().iter().zip(pr.coeffs()).map(|(a, b)| a - b).collect();
        let upd = triple_norm_sq(
            &FeFunction::from_coeffs(v.clone(), dw)?,
            &FeFunction::from_coeffs(q.clone(), dp)?,
            p,
            &nl.u_m,
            &VectorCoef::Discrete(w_new.clone()),
            opts.assembly.quad_degree,
        )?
        .max(0.0)
        .sqrt();
        info!("picard iteration {it}: update {upd:.3e}, residual {res:.2e}");
        w = w_new;
        pr = p_new;
        report.iterations = it;
        report.final_update_norm = upd;
        report.final_residual = res;
        if upd <= picard.tol {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        warn!("Picard iteration did not converge in {} iterations", picard.max_iter);
    }
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(OseenSolution { w, p: pr, report })
}
