use std::fmt::Write;
use std::sync::Arc;

use log::info;

use super::cases::ManufacturedCase;
use super::norms::{error_norms, ErrorNorms};
use crate::error::{invalid, Result};
use crate::mesh::{build_rect_tri_mesh, Pattern};
use crate::par::map_items;
use crate::solve::{
    build_spaces, picard_perturbed_ns, solve_oseen_on, LinearSolver, OseenOptions, PicardOptions, SolveReport,
};

/// One refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub ndof_w: usize,
    pub ndof_p: usize,
    pub errors: ErrorNorms,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceRecord {
    pub levels: Vec<LevelRecord>,
    /// Set when a level failed; earlier levels are kept.
    pub failure: Option<String>,
}

pub const CSV_HEADER: &str =
    "level,h,ndof_w,ndof_p,e0_w,e1_w,e0_p,e_triple,rate_e0_w,rate_e1_w,rate_e0_p,picard_iters";

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

impl ConvergenceRecord {
    fn rates_by(&self, f: impl Fn(&ErrorNorms) -> f64) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| rate(f(&w[0].errors), f(&w[1].errors), w[0].h, w[1].h))
            .collect()
    }

    pub fn rates_e0_w(&self) -> Vec<f64> {
        self.rates_by(|e| e.e0_w)
    }
    pub fn rates_e1_w(&self) -> Vec<f64> {
        self.rates_by(|e| e.e1_w)
    }
    pub fn rates_e0_p(&self) -> Vec<f64> {
        self.rates_by(|e| e.e0_p)
    }
    pub fn rates_triple(&self) -> Vec<f64> {
        self.rates_by(|e| e.e_triple)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        let (r0, r1, rp) = (self.rates_e0_w(), self.rates_e1_w(), self.rates_e0_p());
        for (i, l) in self.levels.iter().enumerate() {
            let fmt_rate = |r: &[f64]| if i == 0 { String::new() } else { format!("{:.4}", r[i - 1]) };
            let _ = writeln!(
                s,
                "{},{:.6e},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{},{}",
                l.level,
                l.h,
                l.ndof_w,
                l.ndof_p,
                l.errors.e0_w,
                l.errors.e1_w,
                l.errors.e0_p,
                l.errors.e_triple,
                fmt_rate(&r0),
                fmt_rate(&r1),
                fmt_rate(&rp),
                l.report.iterations
            );
        }
        s
    }
}

/// Study settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Cells per side on the coarsest level; doubled on each level.
    pub n0: usize,
    pub levels: usize,
    pub pattern: Pattern,
    pub nonlinear: bool,
    pub picard: PicardOptions,
    pub oseen: OseenOptions,
    /// Run levels concurrently.
    pub concurrent_levels: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            n0: 4,
            levels: 4,
            pattern: Pattern::Right,
            nonlinear: false,
            picard: PicardOptions::default(),
            oseen: OseenOptions::default(),
            concurrent_levels: false,
        }
    }
}

/// Runs the linear or nonlinear scheme on uniform refinements of the case
/// domain and records errors. A failure after the first level stops the
/// study and is recorded in [`ConvergenceRecord::failure`].
pub fn run_convergence_study(case: &ManufacturedCase, k: usize, opts: &StudyOptions) -> Result<ConvergenceRecord> {
    let dom = case.domain.ok_or_else(|| invalid!("case '{}' has no rectangular domain", case.name))?;
    if opts.levels < 2 || opts.n0 == 0 {
        return Err(invalid!("a study needs at least two levels and n0 >= 1"));
    }
    let ids: Vec<usize> = (0..opts.levels).collect();
    let mode = if opts.concurrent_levels { opts.oseen.assembly.mode } else { crate::par::ExecMode::Sequential };
    let runs = map_items(mode, &ids, |&i| -> Result<LevelRecord> {
        let n = opts.n0 << i;
        let mesh = Arc::new(build_rect_tri_mesh(dom, n, n, opts.pattern, false)?);
        let (v, q) = build_spaces(&mesh, k)?;
        let (w, p, report) = if opts.nonlinear {
            let s = picard_perturbed_ns(&mesh, k, &case.params, &case.nonlinear_data(), opts.picard, &opts.oseen)?;
            (s.w, s.p, s.report)
        } else {
            let t0 = std::time::Instant::now();
            let data = case.linear_data(&v)?;
            let mut solver = LinearSolver::new(opts.oseen.solver);
            let (w, p, res) = solve_oseen_on(&v, &q, &case.params, &data, &opts.oseen, &mut solver)?;
            let report = SolveReport {
                iterations: 1,
                final_update_norm: 0.0,
                final_residual: res,
                converged: true,
                wall_time: t0.elapsed().as_secs_f64(),
            };
            (w, p, report)
        };
        let errors = error_norms(&w, &p, case, opts.oseen.assembly.quad_degree)?;
        info!(
            "{} k={k} n={n}: e0_w={:.3e} e1_w={:.3e} e0_p={:.3e} ({} iterations)",
            case.name, errors.e0_w, errors.e1_w, errors.e0_p, report.iterations
        );
        Ok(LevelRecord {
            level: i,
            n,
            h: mesh.h_max(),
            ndof_w: v.num_dofs(),
            ndof_p: q.num_dofs(),
            errors,
            report,
        })
    });
    let mut rec = ConvergenceRecord::default();
    for r in runs {
        match r {
            Ok(l) => rec.levels.push(l),
            Err(e) if !rec.levels.is_empty() => {
                rec.failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rec)
}
