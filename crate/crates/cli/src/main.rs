use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info};

use oseen_stab::config::{Experiment, RunConfig};
use oseen_stab::experiments::{run, Outcome};
use oseen_stab::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_PROPERTY: u8 = 4;

/// Stabilized equal-order pressure recovery experiments.
#[derive(Debug, Parser)]
#[command(name = "oseen-stab", version)]
struct Cli {
    /// One of: kovasznay, bent-random, ns-recovery, check.
    experiment: String,
    /// Config file with `key = value` lines and `[section]` headers.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Polynomial degree k.
    #[arg(long)]
    degree: Option<usize>,
    /// Refinement levels of a convergence study.
    #[arg(long)]
    levels: Option<usize>,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let exp: Experiment = cli.experiment.parse()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = RunConfig::parse(&text, Some(exp))?;
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(k) = cli.degree {
        cfg.degree = k;
    }
    if let Some(l) = cli.levels {
        cfg.levels = l;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(outcome: &Outcome) {
    match outcome {
        Outcome::Kovasznay(o) => {
            for s in &o.studies {
                let r = |v: Vec<f64>| v.last().map_or("n/a".to_string(), |x| format!("{x:.3}"));
                println!(
                    "mu={:e} {}: finest rates e1_w={} e0_p={} -> {}",
                    s.mu,
                    if s.nonlinear { "nonlinear" } else { "linear" },
                    r(s.record.rates_e1_w()),
                    r(s.record.rates_e0_p()),
                    s.csv.display()
                );
            }
        }
        Outcome::BentRandom(o) => {
            println!(
                "e0_p={:.4e} e0_w={:.4e} correlation={:.4} sigma_condition={}",
                o.errors.e0_p, o.errors.e0_w, o.correlation, o.sigma.satisfied
            );
        }
        Outcome::NsRecovery(o) => {
            for p in &o.profiles {
                println!("profile {}: pressure {:.3}% speed {:.3}%", p.name, 100.0 * p.p_rel_dev, 100.0 * p.speed_rel_dev);
            }
        }
        Outcome::Check(o) => print!("{}", o.ledger.to_text()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.threads > 1 || cfg.threads == 0 {
        oseen_stab::par::init_threads(cfg.threads);
    }
    info!("running {} into {}", cfg.experiment, cfg.out.display());
    let result = run(&cfg);
    match &result {
        Ok(outcome) => {
            summarize(outcome);
            if !outcome.properties_passed() {
                error!("property suite reported failures");
            }
        }
        Err(e) => error!("{e}"),
    }
    ExitCode::from(exit_code(&result))
}

fn exit_code(result: &Result<Outcome, Error>) -> u8 {
    match result {
        Ok(o) if o.properties_passed() => 0,
        Ok(_) => EXIT_PROPERTY,
        Err(Error::Config(_) | Error::InvalidArgument(_)) => EXIT_CONFIG,
        Err(_) => EXIT_SOLVER,
    }
}
