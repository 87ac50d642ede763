use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{oseen_options, write_log, RunLog};
use crate::analysis::{error_norms, make_trig_case, ErrorNorms};
use crate::config::RunConfig;
use crate::elements::{build_space, default_quad_degree, interpolate_scalar, FeFunction};
use crate::error::{invalid, Result};
use crate::forms::{grad_inf_norm, PhysParams, VectorCoef};
use crate::io::{CsvTable, VtkData, VtkMesh};
use crate::mesh::{build_bent_quad_grid, crisscross_refine, QuadGrid, TriMesh};
use crate::solve::{build_spaces, check_sigma_condition, solve_oseen_on, LinearSolver, SigmaCheck, SolveReport};

#[derive(Debug)]
pub struct BentOutcome {
    pub errors: ErrorNorms,
    /// Pearson correlation of nodal `w_h` against nodal `w`.
    pub correlation: f64,
    pub sigma: SigmaCheck,
    pub report: SolveReport,
    pub tau_ok: bool,
    pub num_quads: usize,
    pub num_triangles: usize,
    pub files: Vec<PathBuf>,
}

/// One velocity per cell with magnitude uniform in `[0, max_speed]` and
/// direction uniform on the circle.
pub fn random_pixel_field(n: usize, max_speed: f64, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let m = rng.random_range(0.0..=max_speed);
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            [m * a.cos(), m * a.sin()]
        })
        .collect()
}

/// P1 field whose vertex value is the mean of the payloads of the quads
/// touching the vertex. `mesh` must come from triangulating `grid`.
pub fn nodal_average(grid: &QuadGrid, mesh: &Arc<TriMesh>) -> Result<FeFunction> {
    let parent = mesh.parent().ok_or_else(|| invalid!("mesh has no parent quads"))?;
    let nv = mesh.num_vertices();
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (c, tri) in mesh.cells().iter().enumerate() {
        for &v in tri {
            if !touching[v].contains(&parent[c]) {
                touching[v].push(parent[c]);
            }
        }
    }
    let payload = grid.payload();
    let v = build_space(mesh.clone(), 1, 2)?;
    let mut coeffs = vec![0.0; 2 * nv];
    for (i, quads) in touching.iter().enumerate() {
        let n = quads.len() as f64;
        for &q in quads {
            coeffs[i] += payload[q][0] / n;
            coeffs[nv + i] += payload[q][1] / n;
        }
    }
    FeFunction::from_coeffs(v, coeffs)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Pressure reconstruction from a random pixel velocity on the bent channel.
pub fn cmd_bent_random(cfg: &RunConfig) -> Result<BentOutcome> {
    let t0 = Instant::now();
    let mut log = RunLog::new(cfg);
    let b = &cfg.bent;
    let mut grid = build_bent_quad_grid(b.inner_radius, b.outer_radius, b.leg_length, b.n_across, b.n_along)?;
    grid.set_payload(random_pixel_field(grid.num_cells(), b.max_speed, cfg.seed))?;
    let mesh = Arc::new(crisscross_refine(&grid)?);
    log.section("mesh");
    log.line(format!("quads={} triangles={} vertices={}", grid.num_cells(), mesh.num_cells(), mesh.num_vertices()));

    let u_m = nodal_average(&grid, &mesh)?;
    let params = PhysParams::new(cfg.mu[0], cfg.rho, cfg.sigma, cfg.lambda, cfg.delta)?;
    let case = make_trig_case(params).with_u_m(VectorCoef::Discrete(u_m.clone()));
    let k = cfg.degree;
    let (v, q) = build_spaces(&mesh, k)?;
    let opts = oseen_options(cfg);

    log.section("conditions");
    log.tau(&mesh, &params, "bent");
    let sigma = check_sigma_condition(&params, &case.u_m, &v, cfg.quad_degree)?;
    log.line(sigma.to_key_value());
    if !sigma.satisfied {
        log::warn!(
            "sigma = {} violates sigma > 4 rho |grad u_m|_inf = {:.4e}",
            params.sigma,
            4.0 * params.rho * sigma.grad_norm
        );
    }

    let t_solve = Instant::now();
    let data = case.linear_data(&v)?;
    let mut solver = LinearSolver::new(opts.solver);
    let (w_h, p_h, res) = solve_oseen_on(&v, &q, &params, &data, &opts, &mut solver)?;
    let report = SolveReport {
        iterations: 1,
        final_update_norm: 0.0,
        final_residual: res,
        converged: true,
        wall_time: t_solve.elapsed().as_secs_f64(),
    };
    log.section("solve");
    log.line(report.to_key_value("oseen."));

    let qd = cfg.quad_degree.unwrap_or(default_quad_degree(k));
    let errors = error_norms(&w_h, &p_h, &case, cfg.quad_degree)?;
    let nv = mesh.num_vertices();
    let ns = v.num_scalar_dofs();
    let w_nodes: Vec<f64> = (0..2).flat_map(|c| (0..nv).map(move |i| (c, i))).map(|(c, i)| case.w.value(mesh.vertices()[i])[c]).collect();
    let wh_nodes: Vec<f64> = (0..2).flat_map(|c| (0..nv).map(move |i| c * ns + i)).map(|j| w_h.coeffs()[j]).collect();
    let correlation = pearson(&wh_nodes, &w_nodes);
    let grad_um = grad_inf_norm(&case.u_m, &v, cfg.quad_degree)?;
    log.section("errors");
    log.line(format!(
        "e0_w={:.6e}\ne1_w={:.6e}\ne0_p={:.6e}\ne_triple={:.6e}\ncorrelation={correlation:.6}",
        errors.e0_w, errors.e1_w, errors.e0_p, errors.e_triple
    ));

    let p_int = interpolate_scalar(&*case.p, &q)?;
    let shift = p_int.mean(qd)? - p_h.mean(qd)?;
    let p_exact: Vec<f64> = mesh.vertices().iter().map(|&x| case.p.value(x)).collect();
    let p_shown: Vec<f64> = p_h.coeffs()[..nv].iter().map(|p| p + shift).collect();
    let w_exact: Vec<[f64; 2]> = mesh.vertices().iter().map(|&x| case.w.value(x)).collect();
    let pixel: Vec<[f64; 2]> = mesh.parent().expect("refined mesh").iter().map(|&c| grid.payload()[c]).collect();
    let VtkData::Vector(um_nodes) = VtkData::from_function(&u_m) else { unreachable!() };
    let VtkData::Vector(wh_vec) = VtkData::from_function(&w_h) else { unreachable!() };
    let sum: Vec<[f64; 2]> = um_nodes.iter().zip(&wh_vec).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect();

    let mut files = Vec::new();
    let vtk_path = cfg.out.join("bent_random.vtk");
    VtkMesh::new(&mesh, "bent channel pressure reconstruction")
        .point_data("u_m", VtkData::Vector(um_nodes))?
        .point_data("w_h", VtkData::Vector(wh_vec))?
        .point_data("w_exact", VtkData::Vector(w_exact))?
        .point_data("u_m_plus_w_h", VtkData::Vector(sum))?
        .point_data("p_h", VtkData::Scalar(p_shown))?
        .point_data("p_exact", VtkData::Scalar(p_exact))?
        .cell_data("u", VtkData::Vector(pixel))?
        .write(&vtk_path)?;
    files.push(vtk_path);

    let mut table = CsvTable::new(&[
        "e0_w",
        "e1_w",
        "e0_p",
        "e_triple",
        "correlation",
        "grad_um_inf",
        "sigma",
        "sigma_margin",
        "linear_residual",
    ]);
    table.push(&[
        errors.e0_w,
        errors.e1_w,
        errors.e0_p,
        errors.e_triple,
        correlation,
        grad_um,
        params.sigma,
        sigma.margin,
        res,
    ]);
    let csv_path = cfg.out.join("bent_random_summary.csv");
    table.write(&csv_path)?;
    files.push(csv_path);

    let tau_ok = log.tau_ok();
    write_log(&cfg.out, &mut log, t0, &mut files)?;
    Ok(BentOutcome {
        errors,
        correlation,
        sigma,
        report,
        tau_ok,
        num_quads: grid.num_cells(),
        num_triangles: mesh.num_cells(),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_field_is_seeded_and_bounded() {
        let a = random_pixel_field(500, 120.0, 7);
        assert_eq!(a, random_pixel_field(500, 120.0, 7));
        assert_ne!(a, random_pixel_field(500, 120.0, 8));
        assert!(a.iter().all(|u| (u[0] * u[0] + u[1] * u[1]).sqrt() <= 120.0 + 1e-12));
    }

    #[test]
    fn nodal_average_of_constant_payload() {
        let mut grid = crate::mesh::QuadGrid::rectangle([0.0, 1.0, 0.0, 1.0], 3, 2).unwrap();
        grid.set_payload(vec![[2.0, -1.0]; 6]).unwrap();
        let mesh = Arc::new(crisscross_refine(&grid).unwrap());
        let u = nodal_average(&grid, &mesh).unwrap();
        let nv = mesh.num_vertices();
        assert!(u.coeffs()[..nv].iter().all(|&x| x == 2.0));
        assert!(u.coeffs()[nv..].iter().all(|&x| x == -1.0));
    }

    #[test]
    fn nodal_average_counts_each_quad_once() {
        let mut grid = crate::mesh::QuadGrid::rectangle([0.0, 2.0, 0.0, 1.0], 2, 1).unwrap();
        grid.set_payload(vec![[1.0, 0.0], [3.0, 0.0]]).unwrap();
        let mesh = Arc::new(crisscross_refine(&grid).unwrap());
        let u = nodal_average(&grid, &mesh).unwrap();
        // vertex 1 sits on the shared edge at (1, 0)
        assert_eq!(mesh.vertices()[1], [1.0, 0.0]);
        assert_eq!(u.coeffs()[1], 2.0);
        assert_eq!(u.coeffs()[0], 1.0);
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}
