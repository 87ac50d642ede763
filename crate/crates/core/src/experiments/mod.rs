//! Drivers for the reconstruction experiments and the property check,
//! writing CSV tables, VTK fields and a `run.log` into the output directory.

mod bent;
mod check;
mod kovasznay;
mod recovery;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::tau_bounds;
use crate::config::{Experiment, RunConfig};
use crate::error::Result;
use crate::forms::{AssemblyOptions, PhysParams};
use crate::io::write_atomic;
use crate::mesh::TriMesh;
use crate::par::ExecMode;
use crate::solve::{OseenOptions, PicardOptions, SolverOptions};

pub use bent::{cmd_bent_random, nodal_average, random_pixel_field, BentOutcome};
pub use check::{cmd_check, CheckOutcome};
pub use kovasznay::{cmd_kovasznay, KovasznayOutcome, StudyEntry};
pub use recovery::{cmd_ns_recovery, reference_grid, viscous_load, Profile, RecoveryOutcome};

/// Text accumulated into `run.log`.
#[derive(Debug, Default, Clone)]
pub struct RunLog {
    text: String,
    tau_ok: bool,
    tau_checked: usize,
}

impl RunLog {
    pub fn new(cfg: &RunConfig) -> Self {
        let mut text = String::from("# parameters\n");
        text.push_str(&cfg.to_text());
        text.push('\n');
        RunLog { text, tau_ok: true, tau_checked: 0 }
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        if !self.text.ends_with('\n') {
            self.text.push('\n');
        }
    }

    pub fn section(&mut self, title: &str) {
        let _ = write!(self.text, "\n# {title}\n");
    }

    /// Records the cellwise τ bounds for one mesh and parameter set.
    pub fn tau(&mut self, mesh: &TriMesh, p: &PhysParams, tag: &str) {
        let r = tau_bounds(mesh, p);
        self.tau_ok &= r.passed;
        self.tau_checked += 1;
        self.line(format!(
            "tau_bounds[{tag}] passed={} worst_ratio={:.6e} cells={}",
            r.passed,
            r.value,
            mesh.num_cells()
        ));
    }

    pub fn tau_ok(&self) -> bool {
        self.tau_ok
    }

    pub fn tau_checked(&self) -> usize {
        self.tau_checked
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Result of [`run`].
#[derive(Debug)]
pub enum Outcome {
    Kovasznay(KovasznayOutcome),
    BentRandom(BentOutcome),
    NsRecovery(RecoveryOutcome),
    Check(CheckOutcome),
}

impl Outcome {
    /// False when the property suite found a violation.
    pub fn properties_passed(&self) -> bool {
        match self {
            Outcome::Check(c) => c.ledger.all_passed(),
            _ => true,
        }
    }

    pub fn files(&self) -> &[PathBuf] {
        match self {
            Outcome::Kovasznay(o) => &o.files,
            Outcome::BentRandom(o) => &o.files,
            Outcome::NsRecovery(o) => &o.files,
            Outcome::Check(o) => &o.files,
        }
    }
}

/// Runs the configured experiment.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        Experiment::Kovasznay => Outcome::Kovasznay(cmd_kovasznay(cfg)?),
        Experiment::BentRandom => Outcome::BentRandom(cmd_bent_random(cfg)?),
        Experiment::NsRecovery => Outcome::NsRecovery(cmd_ns_recovery(cfg)?),
        Experiment::Check => Outcome::Check(cmd_check(cfg)?),
    })
}

pub(crate) fn exec_mode(cfg: &RunConfig) -> ExecMode {
    if cfg.threads == 1 {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

pub(crate) fn oseen_options(cfg: &RunConfig) -> OseenOptions {
    OseenOptions {
        assembly: AssemblyOptions { quad_degree: cfg.quad_degree, mode: exec_mode(cfg), ..Default::default() },
        solver: solver_options(cfg),
    }
}

pub(crate) fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { method: cfg.method, rtol: cfg.rtol, ..Default::default() }
}

pub(crate) fn picard_options(cfg: &RunConfig) -> PicardOptions {
    PicardOptions { tol: cfg.picard_tol, max_iter: cfg.picard_max_iter }
}

pub(crate) fn write_log(dir: &Path, log: &mut RunLog, t0: Instant, files: &mut Vec<PathBuf>) -> Result<()> {
    log.section("timing");
    log.line(format!("wall_time={:.3}", t0.elapsed().as_secs_f64()));
    let path = dir.join("run.log");
    write_atomic(&path, log.text().as_bytes())?;
    files.push(path);
    Ok(())
}
