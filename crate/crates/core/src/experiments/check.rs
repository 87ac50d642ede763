use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use super::{oseen_options, write_log, RunLog};
use crate::analysis::{make_polynomial_case, property_suite, PropertyLedger};
use crate::config::RunConfig;
use crate::error::Result;
use crate::forms::PhysParams;
use crate::io::write_atomic;
use crate::mesh::build_rect_tri_mesh;
use crate::solve::build_spaces;

#[derive(Debug)]
pub struct CheckOutcome {
    pub ledger: PropertyLedger,
    pub files: Vec<PathBuf>,
}

/// Property suite over every configured degree and unit-square mesh, with
/// `u_m = (x, −y)` as the measured field.
pub fn cmd_check(cfg: &RunConfig) -> Result<CheckOutcome> {
    let t0 = Instant::now();
    let mut log = RunLog::new(cfg);
    let params = PhysParams::new(cfg.mu[0], cfg.rho, cfg.sigma, cfg.lambda, cfg.delta)?;
    let case = make_polynomial_case(params);
    let opts = oseen_options(cfg).assembly;
    let mut ledger = PropertyLedger::default();
    for &n in &cfg.check.meshes {
        let mesh = Arc::new(build_rect_tri_mesh([0.0, 1.0, 0.0, 1.0], n, n, cfg.pattern, false)?);
        for &k in &cfg.check.degrees {
            let (v, _) = build_spaces(&mesh, k)?;
            let data = case.linear_data(&v)?;
            log::info!("property suite: k={k} on {n}x{n}");
            ledger.extend(property_suite(&mesh, k, &params, &data, &opts, cfg.seed)?);
        }
    }
    log.section("ledger");
    log.line(ledger.to_text());
    log.line(format!("all_passed={}", ledger.all_passed()));
    let mut files = Vec::new();
    let path = cfg.out.join("check_ledger.txt");
    write_atomic(&path, ledger.to_text().as_bytes())?;
    files.push(path);
    write_log(&cfg.out, &mut log, t0, &mut files)?;
    Ok(CheckOutcome { ledger, files })
}
