use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use log::info;

use super::{exec_mode, oseen_options, picard_options, solver_options, write_log, RunLog};
use crate::config::RunConfig;
use crate::elements::{build_space, default_quad_degree, quadrature_rule, FeFunction, FeSpace};
use crate::error::{invalid, Result};
use crate::forms::{grad_inf_norm, parabolic_inlet, BoundaryValues, ChannelParams, PhysParams, ScalarCoef, VectorCoef};
use crate::io::{CsvTable, VtkData, VtkMesh};
use crate::mesh::{build_rect_tri_mesh, Pattern, Point, PointLocator, TriMesh};
use crate::solve::{
    check_sigma_condition, picard_perturbed_ns, solve_coarse_ns, solve_taylor_hood_ns, NonlinearData, PicardOptions,
    SigmaCheck, SolveReport,
};

/// Samples of the reconstruction and the reference along one line.
#[derive(Debug, Clone)]
pub struct Profile {
    pub name: String,
    pub points: Vec<Point>,
    pub p_h: Vec<f64>,
    pub p_ref: Vec<f64>,
    /// `|u_m + w_h|`.
    pub speed_h: Vec<f64>,
    pub speed_ref: Vec<f64>,
    pub speed_m: Vec<f64>,
    /// `max |p_h − p_ref| / max |p_ref|` along the line.
    pub p_rel_dev: f64,
    /// `max | |u_m + w_h| − |u_ref| | / max |u_ref|` along the line.
    pub speed_rel_dev: f64,
}

#[derive(Debug)]
pub struct RecoveryOutcome {
    pub profiles: Vec<Profile>,
    pub um_inf: f64,
    pub grad_um_inf: f64,
    pub sigma: SigmaCheck,
    pub coarse_report: SolveReport,
    pub recon_report: SolveReport,
    pub ref_report: SolveReport,
    pub coarse_triangles: usize,
    pub ref_triangles: usize,
    pub tau_ok: bool,
    pub files: Vec<PathBuf>,
}

impl RecoveryOutcome {
    pub fn profile(&self, name: &str) -> Option<&Profile> {
        self.profiles.iter().find(|p| p.name == name)
    }
}

/// `(nx, ny)` of a two-triangles-per-quad grid of `(0, length) × (0, 1)`
/// with about `triangles` cells and near-square quads.
pub fn reference_grid(length: f64, triangles: usize) -> (usize, usize) {
    let ny = ((triangles as f64 / (2.0 * length)).sqrt().round() as usize).max(2);
    let nx = ((length * ny as f64).round() as usize).max(2);
    (nx, ny)
}

fn eval_or_err(f: &FeFunction, loc: &PointLocator, x: Point) -> Result<[f64; 2]> {
    f.evaluate_at(loc, x)
        .map(|e| e.value)
        .ok_or_else(|| invalid!("profile point ({}, {}) lies outside the mesh", x[0], x[1]))
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let num = max_abs(a.iter().zip(b).map(|(x, y)| x - y));
    let den = max_abs(b.iter().copied());
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

struct Fields<'a> {
    u_m: &'a FeFunction,
    w_h: &'a FeFunction,
    p_h: &'a FeFunction,
    p_shift: f64,
    u_ref: &'a FeFunction,
    p_ref: &'a FeFunction,
}

fn sample(name: &str, points: Vec<Point>, f: &Fields, loc_h: &PointLocator, loc_ref: &PointLocator) -> Result<Profile> {
    let n = points.len();
    let mut pr = Profile {
        name: name.to_string(),
        points: Vec::with_capacity(n),
        p_h: Vec::with_capacity(n),
        p_ref: Vec::with_capacity(n),
        speed_h: Vec::with_capacity(n),
        speed_ref: Vec::with_capacity(n),
        speed_m: Vec::with_capacity(n),
        p_rel_dev: 0.0,
        speed_rel_dev: 0.0,
    };
    let norm = |u: [f64; 2]| u[0].hypot(u[1]);
    for x in points {
        let um = eval_or_err(f.u_m, loc_h, x)?;
        let wh = eval_or_err(f.w_h, loc_h, x)?;
        pr.p_h.push(eval_or_err(f.p_h, loc_h, x)?[0] + f.p_shift);
        pr.p_ref.push(eval_or_err(f.p_ref, loc_ref, x)?[0]);
        pr.speed_h.push(norm([um[0] + wh[0], um[1] + wh[1]]));
        pr.speed_m.push(norm(um));
        pr.speed_ref.push(norm(eval_or_err(f.u_ref, loc_ref, x)?));
        pr.points.push(x);
    }
    pr.p_rel_dev = rel_dev(&pr.p_h, &pr.p_ref);
    pr.speed_rel_dev = rel_dev(&pr.speed_h, &pr.speed_ref);
    Ok(pr)
}

/// `−μ(∇u_m, ∇φ_i)` for every velocity basis function of `v`.
pub fn viscous_load(u_m: &FeFunction, v: &FeSpace, mu: f64) -> Result<Vec<f64>> {
    if !v.same_mesh(u_m.space()) {
        return Err(invalid!("u_m and the velocity space live on different meshes"));
    }
    let rule = quadrature_rule(default_quad_degree(v.degree()))?;
    let tab = v.element().tabulate(rule.points());
    let ns = v.num_scalar_dofs();
    let mut load = vec![0.0; v.num_dofs()];
    for c in 0..v.mesh().num_cells() {
        let g = v.geometry(c);
        for (k, (&xi, &wq)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let gu = u_m.evaluate(c, xi).grad;
            for (i, &d) in v.cell_dofs(c).iter().enumerate() {
                let gp = g.grad(tab.at[k].grads[i]);
                for comp in 0..2 {
                    load[comp * ns + d] -= wq * g.det * mu * (gu[comp][0] * gp[0] + gu[comp][1] * gp[1]);
                }
            }
        }
    }
    Ok(load)
}

fn profile_table(p: &Profile) -> CsvTable {
    let mut t = CsvTable::new(&["x", "y", "p_h", "p_ref", "speed_h", "speed_ref", "speed_m"]);
    for i in 0..p.points.len() {
        t.push(&[p.points[i][0], p.points[i][1], p.p_h[i], p.p_ref[i], p.speed_h[i], p.speed_ref[i], p.speed_m[i]]);
    }
    t
}

fn vertex_values(f: &FeFunction, mesh: &TriMesh, loc: &PointLocator) -> Result<Vec<[f64; 2]>> {
    mesh.vertices().iter().map(|&x| eval_or_err(f, loc, x)).collect()
}

/// Pressure recovery from an interpolated channel flow, validated against
/// a Taylor-Hood reference.
pub fn cmd_ns_recovery(cfg: &RunConfig) -> Result<RecoveryOutcome> {
    let t0 = Instant::now();
    let mut log = RunLog::new(cfg);
    let rc = &cfg.recovery;
    let mode = exec_mode(cfg);
    let mu = cfg.mu[0];
    let len = rc.length;
    let inlet = parabolic_inlet(rc.inlet_amplitude);
    let channel = ChannelParams { mu, rho: cfg.rho, sigma: cfg.sigma };
    let outer = PicardOptions { tol: rc.coarse_tol, max_iter: rc.coarse_max_iter };

    // coarse flow on the reconstruction mesh
    let mesh = Arc::new(build_rect_tri_mesh([0.0, len, 0.0, 1.0], rc.coarse_nx, rc.coarse_ny, Pattern::CrissCross, true)?);
    let coarse = solve_coarse_ns(&mesh, &channel, &inlet, outer, solver_options(cfg), mode)?;
    log.section("coarse flow");
    log.line(format!("triangles={}", mesh.num_cells()));
    log.line(coarse.report.to_key_value("coarse."));
    info!("coarse flow: {} Picard iterations", coarse.report.iterations);

    // reconstruction
    let params = PhysParams::new(mu, cfg.rho, cfg.sigma, cfg.lambda, cfg.delta)?;
    let u_m = coarse.u.clone();
    let (sigma_, rho) = (params.sigma, params.rho);
    let um_f = u_m.clone();
    let f = VectorCoef::Pointwise(Arc::new(move |q| {
        let e = um_f.evaluate(q.cell, q.xi);
        let (u, g) = (e.value, e.grad);
        [
            -sigma_ * u[0] - rho * (g[0][0] * u[0] + g[0][1] * u[1]),
            -sigma_ * u[1] - rho * (g[1][0] * u[0] + g[1][1] * u[1]),
        ]
    }));
    let um_g = u_m.clone();
    let g = ScalarCoef::Pointwise(Arc::new(move |q| {
        let gr = um_g.evaluate(q.cell, q.xi).grad;
        -(gr[0][0] + gr[1][1])
    }));
    let load = if rc.viscous_load {
        let v = build_space(mesh.clone(), cfg.degree, 2)?;
        Some(Arc::new(viscous_load(&u_m, &v, mu)?))
    } else {
        None
    };
    let nl = NonlinearData { u_m: VectorCoef::Discrete(u_m.clone()), f, g, boundary: BoundaryValues::Zero, load };
    let opts = oseen_options(cfg);

    log.section("conditions");
    log.tau(&mesh, &params, "reconstruction");
    let nv = mesh.num_vertices();
    let um_inf = (0..nv).map(|i| u_m.coeffs()[i].hypot(u_m.coeffs()[nv + i])).fold(0.0, f64::max);
    let v1 = u_m.space().clone();
    let sigma = check_sigma_condition(&params, &nl.u_m, &v1, cfg.quad_degree)?;
    let grad_um_inf = grad_inf_norm(&nl.u_m, &v1, cfg.quad_degree)?;
    log.line(sigma.to_key_value());
    log.line(format!(
        "um_inf={um_inf:.6e}\nsigma_vs_um_inf.satisfied={}\nsigma_vs_um_inf.margin={:.6e}",
        params.sigma > 4.0 * params.rho * um_inf,
        params.sigma - 4.0 * params.rho * um_inf
    ));

    let recon = picard_perturbed_ns(&mesh, cfg.degree, &params, &nl, picard_options(cfg), &opts)?;
    log.section("reconstruction");
    log.line(recon.report.to_key_value("reconstruction."));
    info!("reconstruction: {} Picard iterations", recon.report.iterations);

    // reference
    let (rx, ry) = reference_grid(len, rc.ref_triangles);
    let ref_mesh = Arc::new(build_rect_tri_mesh([0.0, len, 0.0, 1.0], rx, ry, Pattern::Right, true)?);
    let reference = solve_taylor_hood_ns(&ref_mesh, &channel, &inlet, outer, solver_options(cfg), mode)?;
    log.section("reference");
    log.line(format!("triangles={} grid={rx}x{ry}", ref_mesh.num_cells()));
    log.line(reference.report.to_key_value("reference."));
    info!("reference: {} Picard iterations", reference.report.iterations);

    // both pressures are compared with matching means
    let qd = cfg.quad_degree.unwrap_or(default_quad_degree(2));
    let p_shift = reference.p.mean(qd)? - recon.p.mean(qd)?;
    let fields =
        Fields { u_m: &u_m, w_h: &recon.w, p_h: &recon.p, p_shift, u_ref: &reference.u, p_ref: &reference.p };
    let loc_h = PointLocator::new(&mesh);
    let loc_ref = PointLocator::new(&ref_mesh);
    let n = rc.profile_points;
    let t = |i: usize| i as f64 / (n - 1) as f64;
    let lines = [
        ("x0", (0..n).map(|i| [0.0, t(i)]).collect::<Vec<_>>()),
        ("y0.5", (0..n).map(|i| [len * t(i), 0.5]).collect()),
        ("y1", (0..n).map(|i| [len * t(i), 1.0]).collect()),
    ];
    let mut profiles = Vec::new();
    let mut files = Vec::new();
    let mut summary = CsvTable::new(&["profile", "p_rel_dev", "speed_rel_dev"]);
    log.section("profiles");
    for (name, pts) in lines {
        let pr = sample(name, pts, &fields, &loc_h, &loc_ref)?;
        let path = cfg.out.join(format!("profile_{name}.csv"));
        profile_table(&pr).write(&path)?;
        files.push(path);
        log.line(format!("{name}.p_rel_dev={:.6e}\n{name}.speed_rel_dev={:.6e}", pr.p_rel_dev, pr.speed_rel_dev));
        summary.push_labeled(name, &[pr.p_rel_dev, pr.speed_rel_dev]);
        profiles.push(pr);
    }
    let path = cfg.out.join("profile_summary.csv");
    summary.write(&path)?;
    files.push(path);

    let VtkData::Vector(um_nodes) = VtkData::from_function(&u_m) else { unreachable!() };
    let wh_nodes = vertex_values(&recon.w, &mesh, &loc_h)?;
    let sum: Vec<[f64; 2]> = um_nodes.iter().zip(&wh_nodes).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect();
    let ph: Vec<f64> = vertex_values(&recon.p, &mesh, &loc_h)?.iter().map(|v| v[0] + p_shift).collect();
    let uref_h = vertex_values(&reference.u, &mesh, &loc_ref)?;
    let pref_h: Vec<f64> = vertex_values(&reference.p, &mesh, &loc_ref)?.iter().map(|v| v[0]).collect();
    let path = cfg.out.join("recovery.vtk");
    VtkMesh::new(&mesh, "channel pressure recovery")
        .point_data("u_m", VtkData::Vector(um_nodes))?
        .point_data("w_h", VtkData::Vector(wh_nodes))?
        .point_data("u_m_plus_w_h", VtkData::Vector(sum))?
        .point_data("p_h", VtkData::Scalar(ph))?
        .point_data("u_ref", VtkData::Vector(uref_h))?
        .point_data("p_ref", VtkData::Scalar(pref_h))?
        .write(&path)?;
    files.push(path);
    let path = cfg.out.join("reference.vtk");
    VtkMesh::new(&ref_mesh, "Taylor-Hood reference")
        .point_data("u_ref", VtkData::from_function(&reference.u))?
        .point_data("p_ref", VtkData::from_function(&reference.p))?
        .write(&path)?;
    files.push(path);

    let tau_ok = log.tau_ok();
    write_log(&cfg.out, &mut log, t0, &mut files)?;
    Ok(RecoveryOutcome {
        profiles,
        um_inf,
        grad_um_inf,
        sigma,
        coarse_report: coarse.report,
        recon_report: recon.report,
        ref_report: reference.report,
        coarse_triangles: mesh.num_cells(),
        ref_triangles: ref_mesh.num_cells(),
        tau_ok,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_hits_target() {
        assert_eq!(reference_grid(4.0, 20_000), (200, 50));
        let (nx, ny) = reference_grid(4.0, 80_000);
        assert_eq!(2 * nx * ny, 80_000);
    }

    #[test]
    fn rel_dev_handles_zero_reference() {
        assert_eq!(rel_dev(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((rel_dev(&[1.0, 2.1], &[1.0, 2.0]) - 0.05).abs() < 1e-12);
    }
}
