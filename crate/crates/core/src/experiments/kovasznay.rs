use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use log::info;

use super::{oseen_options, picard_options, write_log, RunLog};
use crate::analysis::{make_kovasznay_case, run_convergence_study, ConvergenceRecord, StudyOptions};
use crate::config::RunConfig;
use crate::error::Result;
use crate::io::write_atomic;
use crate::mesh::build_rect_tri_mesh;
use crate::solve::{build_spaces, check_sigma_condition};

/// One study of the sweep.
#[derive(Debug, Clone)]
pub struct StudyEntry {
    pub mu: f64,
    pub nonlinear: bool,
    pub record: ConvergenceRecord,
    pub csv: PathBuf,
}

#[derive(Debug)]
pub struct KovasznayOutcome {
    pub studies: Vec<StudyEntry>,
    pub tau_ok: bool,
    pub files: Vec<PathBuf>,
}

/// File name of the CSV for one `(scheme, k, μ)`.
pub fn study_file_name(nonlinear: bool, k: usize, mu: f64) -> String {
    let scheme = if nonlinear { "nonlinear" } else { "linear" };
    format!("kovasznay_{scheme}_k{k}_mu{mu:e}.csv")
}

/// Convergence studies of the Kovasznay case for every configured viscosity.
pub fn cmd_kovasznay(cfg: &RunConfig) -> Result<KovasznayOutcome> {
    let t0 = Instant::now();
    let mut log = RunLog::new(cfg);
    let k = cfg.degree;
    let mut studies = Vec::new();
    let mut files = Vec::new();
    let schemes: Vec<bool> = [(cfg.linear, false), (cfg.nonlinear, true)]
        .into_iter()
        .filter_map(|(on, nl)| on.then_some(nl))
        .collect();
    for &mu in &cfg.mu {
        let mut case = make_kovasznay_case(mu, cfg.rho, cfg.sigma, cfg.zeta)?;
        case.params.lambda = cfg.lambda;
        case.params.delta = cfg.delta;
        case.params.validate()?;
        let dom = case.domain.expect("kovasznay case has a domain");

        log.section(&format!("mu={mu:e}"));
        let coarse = Arc::new(build_rect_tri_mesh(dom, cfg.n0, cfg.n0, cfg.pattern, false)?);
        let (v, _) = build_spaces(&coarse, k)?;
        let sig = check_sigma_condition(&case.params, &case.u_m, &v, cfg.quad_degree)?;
        log.line(sig.to_key_value());
        for i in 0..cfg.levels {
            let n = cfg.n0 << i;
            let mesh = build_rect_tri_mesh(dom, n, n, cfg.pattern, false)?;
            log.tau(&mesh, &case.params, &format!("n={n}"));
        }

        for &nonlinear in &schemes {
            let opts = StudyOptions {
                n0: cfg.n0,
                levels: cfg.levels,
                pattern: cfg.pattern,
                nonlinear,
                picard: picard_options(cfg),
                oseen: oseen_options(cfg),
                concurrent_levels: cfg.concurrent_levels,
            };
            let record = run_convergence_study(&case, k, &opts)?;
            let csv = cfg.out.join(study_file_name(nonlinear, k, mu));
            write_atomic(&csv, record.to_csv().as_bytes())?;
            let scheme = if nonlinear { "nonlinear" } else { "linear" };
            for l in &record.levels {
                log.line(l.report.to_key_value(&format!("{scheme}.level{}.", l.level)));
            }
            if let Some(f) = &record.failure {
                log.line(format!("{scheme}.failure={f}"));
            }
            info!("wrote {}", csv.display());
            files.push(csv.clone());
            studies.push(StudyEntry { mu, nonlinear, record, csv });
        }
    }
    let tau_ok = log.tau_ok();
    write_log(&cfg.out, &mut log, t0, &mut files)?;
    Ok(KovasznayOutcome { studies, tau_ok, files })
}
