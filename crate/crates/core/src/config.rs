//! Run configuration: flat `key = value` text grouped under `[section]`
//! headers. Keys outside any section belong to the top level.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::analysis::ZetaVariant;
use crate::error::{Error, Result};
use crate::mesh::Pattern;
use crate::solve::SolverMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Kovasznay,
    BentRandom,
    NsRecovery,
    Check,
}

impl Experiment {
    pub const ALL: [Experiment; 4] =
        [Experiment::Kovasznay, Experiment::BentRandom, Experiment::NsRecovery, Experiment::Check];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Kovasznay => "kovasznay",
            Experiment::BentRandom => "bent-random",
            Experiment::NsRecovery => "ns-recovery",
            Experiment::Check => "check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BentConfig {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub leg_length: f64,
    pub n_across: usize,
    pub n_along: usize,
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub length: f64,
    pub coarse_nx: usize,
    pub coarse_ny: usize,
    pub coarse_tol: f64,
    pub coarse_max_iter: usize,
    pub ref_triangles: usize,
    pub inlet_amplitude: f64,
    pub profile_points: usize,
    /// Adds the weak viscous term `−μ(∇u_m, ∇v)` of the measured field to
    /// the reconstruction load.
    pub viscous_load: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub meshes: Vec<usize>,
    pub degrees: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub degree: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// 0 uses every core, 1 runs sequentially.
    pub threads: usize,
    pub zeta: ZetaVariant,
    pub quad_degree: Option<usize>,

    pub n0: usize,
    pub levels: usize,
    pub pattern: Pattern,

    pub mu: Vec<f64>,
    pub rho: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub delta: f64,

    pub linear: bool,
    pub nonlinear: bool,
    pub concurrent_levels: bool,

    pub picard_tol: f64,
    pub picard_max_iter: usize,

    pub method: SolverMethod,
    pub rtol: f64,

    pub bent: BentConfig,
    pub recovery: RecoveryConfig,
    pub check: CheckConfig,
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = RunConfig {
            experiment,
            degree: 1,
            seed: 20240611,
            out: PathBuf::from("out"),
            threads: 0,
            zeta: ZetaVariant::Standard,
            quad_degree: None,
            n0: 4,
            levels: 4,
            pattern: Pattern::Right,
            mu: vec![1.0, 0.1, 0.01, 0.001],
            rho: 1.0,
            sigma: 1.0,
            lambda: 0.5,
            delta: 0.001,
            linear: true,
            nonlinear: false,
            concurrent_levels: false,
            picard_tol: 1e-6,
            picard_max_iter: 50,
            method: SolverMethod::Direct,
            rtol: 1e-10,
            bent: BentConfig {
                inner_radius: 1.0,
                outer_radius: 2.0,
                leg_length: 3.0,
                n_across: 9,
                n_along: 77,
                max_speed: 120.0,
            },
            recovery: RecoveryConfig {
                length: 4.0,
                coarse_nx: 40,
                coarse_ny: 10,
                coarse_tol: 1e-10,
                coarse_max_iter: 100,
                ref_triangles: 20_000,
                inlet_amplitude: 1.0,
                profile_points: 101,
                viscous_load: false,
            },
            check: CheckConfig { meshes: vec![2, 8], degrees: vec![1, 2, 3] },
        };
        match experiment {
            Experiment::Kovasznay => {}
            Experiment::BentRandom => {
                c.mu = vec![0.0483];
                c.rho = 1.119;
                c.sigma = 5.37;
                c.delta = 0.5;
            }
            Experiment::NsRecovery => {
                c.mu = vec![0.035];
                c.sigma = 3.92;
                c.picard_tol = 1e-10;
                c.picard_max_iter = 100;
            }
            Experiment::Check => {
                c.mu = vec![0.1];
                c.sigma = 5.0;
                c.pattern = Pattern::CrissCross;
            }
        }
        c
    }

    /// Parses a config file. `experiment` supplies the experiment when the
    /// file does not name one; a conflicting name is an error.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let mut kv = parse_pairs(text)?;
        let named = kv.remove("experiment").map(|s| s.parse::<Experiment>()).transpose()?;
        let exp = match (named, experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config is for '{a}' but '{b}' was requested")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("no experiment given".into())),
        };
        let mut c = RunConfig::defaults(exp);
        let mut r = Reader(kv);
        r.get("degree", &mut c.degree)?;
        r.get("seed", &mut c.seed)?;
        if let Some(s) = r.take("out") {
            c.out = PathBuf::from(s);
        }
        r.get("threads", &mut c.threads)?;
        r.get("zeta", &mut c.zeta)?;
        if let Some(s) = r.take("quad_degree") {
            c.quad_degree = if s == "auto" { None } else { Some(parse_value("quad_degree", &s)?) };
        }
        r.get("mesh.n0", &mut c.n0)?;
        r.get("mesh.levels", &mut c.levels)?;
        if let Some(s) = r.take("mesh.pattern") {
            c.pattern = parse_pattern(&s)?;
        }
        r.list("physics.mu", &mut c.mu)?;
        r.get("physics.rho", &mut c.rho)?;
        r.get("physics.sigma", &mut c.sigma)?;
        r.get("physics.lambda", &mut c.lambda)?;
        r.get("physics.delta", &mut c.delta)?;
        r.get("study.linear", &mut c.linear)?;
        r.get("study.nonlinear", &mut c.nonlinear)?;
        r.get("study.concurrent_levels", &mut c.concurrent_levels)?;
        r.get("picard.tol", &mut c.picard_tol)?;
        r.get("picard.max_iter", &mut c.picard_max_iter)?;
        r.get("solver.method", &mut c.method)?;
        r.get("solver.rtol", &mut c.rtol)?;
        r.get("bent.inner_radius", &mut c.bent.inner_radius)?;
        r.get("bent.outer_radius", &mut c.bent.outer_radius)?;
        r.get("bent.leg_length", &mut c.bent.leg_length)?;
        r.get("bent.n_across", &mut c.bent.n_across)?;
        r.get("bent.n_along", &mut c.bent.n_along)?;
        r.get("bent.max_speed", &mut c.bent.max_speed)?;
        r.get("recovery.length", &mut c.recovery.length)?;
        r.get("recovery.coarse_nx", &mut c.recovery.coarse_nx)?;
        r.get("recovery.coarse_ny", &mut c.recovery.coarse_ny)?;
        r.get("recovery.coarse_tol", &mut c.recovery.coarse_tol)?;
        r.get("recovery.coarse_max_iter", &mut c.recovery.coarse_max_iter)?;
        r.get("recovery.ref_triangles", &mut c.recovery.ref_triangles)?;
        r.get("recovery.inlet_amplitude", &mut c.recovery.inlet_amplitude)?;
        r.get("recovery.profile_points", &mut c.recovery.profile_points)?;
        r.get("recovery.viscous_load", &mut c.recovery.viscous_load)?;
        r.list("check.meshes", &mut c.check.meshes)?;
        r.list("check.degrees", &mut c.check.degrees)?;
        if let Some(k) = r.0.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(1..=3).contains(&self.degree) {
            return bad("degree must be 1, 2 or 3");
        }
        if self.n0 == 0 || self.levels == 0 {
            return bad("mesh.n0 and mesh.levels must be positive");
        }
        if self.experiment == Experiment::Kovasznay && self.levels < 2 {
            return bad("a convergence study needs at least 2 levels");
        }
        if self.mu.is_empty() || self.mu.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return bad("physics.mu must be a nonempty list of positive numbers");
        }
        for (name, v) in [("rho", self.rho), ("lambda", self.lambda)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("physics.{name} must be nonnegative")));
            }
        }
        for (name, v) in [
            ("physics.sigma", self.sigma),
            ("physics.delta", self.delta),
            ("picard.tol", self.picard_tol),
            ("solver.rtol", self.rtol),
            ("recovery.length", self.recovery.length),
            ("recovery.coarse_tol", self.recovery.coarse_tol),
            ("recovery.inlet_amplitude", self.recovery.inlet_amplitude),
            ("bent.inner_radius", self.bent.inner_radius),
            ("bent.leg_length", self.bent.leg_length + f64::MIN_POSITIVE),
            ("bent.max_speed", self.bent.max_speed + f64::MIN_POSITIVE),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.bent.outer_radius <= self.bent.inner_radius {
            return bad("bent.outer_radius must exceed bent.inner_radius");
        }
        if self.picard_max_iter == 0 || self.recovery.coarse_max_iter == 0 {
            return bad("iteration limits must be positive");
        }
        if self.bent.n_across == 0 || self.bent.n_along == 0 {
            return bad("bent grid sizes must be positive");
        }
        if self.recovery.coarse_nx == 0 || self.recovery.coarse_ny == 0 || self.recovery.profile_points < 2 {
            return bad("recovery grid sizes must be positive and profile_points at least 2");
        }
        if self.recovery.ref_triangles < 16 {
            return bad("recovery.ref_triangles must be at least 16");
        }
        if self.check.meshes.is_empty() || self.check.meshes.contains(&0) {
            return bad("check.meshes must list positive sizes");
        }
        if self.check.degrees.is_empty() || self.check.degrees.iter().any(|k| !(1..=3).contains(k)) {
            return bad("check.degrees must list degrees in 1..=3");
        }
        if !self.linear && !self.nonlinear {
            return bad("at least one of study.linear and study.nonlinear must be true");
        }
        if let Some(q) = self.quad_degree {
            if q == 0 || q > crate::elements::MAX_QUADRATURE_DEGREE {
                return Err(Error::Config(format!(
                    "quad_degree must be in 1..={}",
                    crate::elements::MAX_QUADRATURE_DEGREE
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "degree = {}", self.degree);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "zeta = {}", self.zeta);
        match self.quad_degree {
            Some(q) => writeln!(s, "quad_degree = {q}"),
            None => writeln!(s, "quad_degree = auto"),
        }
        .ok();
        let pattern = match self.pattern {
            Pattern::Right => "right",
            Pattern::CrissCross => "crisscross",
        };
        let _ = write!(
            s,
            "\n[mesh]\nn0 = {}\nlevels = {}\npattern = {pattern}\n",
            self.n0, self.levels
        );
        let _ = write!(
            s,
            "\n[physics]\nmu = {}\nrho = {}\nsigma = {}\nlambda = {}\ndelta = {}\n",
            join(&self.mu),
            self.rho,
            self.sigma,
            self.lambda,
            self.delta
        );
        let _ = write!(
            s,
            "\n[study]\nlinear = {}\nnonlinear = {}\nconcurrent_levels = {}\n",
            self.linear, self.nonlinear, self.concurrent_levels
        );
        let _ = write!(s, "\n[picard]\ntol = {}\nmax_iter = {}\n", self.picard_tol, self.picard_max_iter);
        let _ = write!(s, "\n[solver]\nmethod = {}\nrtol = {}\n", self.method, self.rtol);
        let b = &self.bent;
        let _ = write!(
            s,
            "\n[bent]\ninner_radius = {}\nouter_radius = {}\nleg_length = {}\nn_across = {}\nn_along = {}\nmax_speed = {}\n",
            b.inner_radius, b.outer_radius, b.leg_length, b.n_across, b.n_along, b.max_speed
        );
        let r = &self.recovery;
        let _ = write!(
            s,
            "\n[recovery]\nlength = {}\ncoarse_nx = {}\ncoarse_ny = {}\ncoarse_tol = {}\ncoarse_max_iter = {}\nref_triangles = {}\ninlet_amplitude = {}\nprofile_points = {}\nviscous_load = {}\n",
            r.length,
            r.coarse_nx,
            r.coarse_ny,
            r.coarse_tol,
            r.coarse_max_iter,
            r.ref_triangles,
            r.inlet_amplitude,
            r.profile_points,
            r.viscous_load
        );
        let _ = write!(s, "\n[check]\nmeshes = {}\ndegrees = {}\n", join(&self.check.meshes), join(&self.check.degrees));
        s
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_pattern(s: &str) -> Result<Pattern> {
    match s {
        "right" => Ok(Pattern::Right),
        "crisscross" | "criss-cross" => Ok(Pattern::CrissCross),
        _ => Err(Error::Config(format!("unknown mesh pattern '{s}'"))),
    }
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Config(format!("bad value '{s}' for {key}")))
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", n + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(out)
}

struct Reader(BTreeMap<String, String>);

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn get<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(s) = self.take(key) {
            *slot = parse_value(key, &s)?;
        }
        Ok(())
    }

    fn list<T: FromStr>(&mut self, key: &str, slot: &mut Vec<T>) -> Result<()> {
        if let Some(s) = self.take(key) {
            *slot = s.split(',').map(|x| parse_value(key, x.trim())).collect::<Result<_>>()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        for e in Experiment::ALL {
            let c = RunConfig::defaults(e);
            c.validate().unwrap();
            assert_eq!(RunConfig::parse(&c.to_text(), None).unwrap(), c);
        }
    }

    #[test]
    fn sections_and_comments() {
        let c = RunConfig::parse(
            "# sweep\ndegree = 2\n[physics]\nmu = 1, 0.01 # two values\n[mesh]\npattern = crisscross\n",
            Some(Experiment::Kovasznay),
        )
        .unwrap();
        assert_eq!(c.degree, 2);
        assert_eq!(c.mu, vec![1.0, 0.01]);
        assert_eq!(c.pattern, Pattern::CrissCross);
    }

    #[test]
    fn errors() {
        let k = Some(Experiment::Kovasznay);
        assert!(RunConfig::parse("bogus = 1", k).is_err());
        assert!(RunConfig::parse("degree = 7", k).is_err());
        assert!(RunConfig::parse("degree = x", k).is_err());
        assert!(RunConfig::parse("[physics]\nmu = -1", k).is_err());
        assert!(RunConfig::parse("degree = 1\ndegree = 2", k).is_err());
        assert!(RunConfig::parse("experiment = check", k).is_err());
        assert!(RunConfig::parse("", None).is_err());
        assert!(RunConfig::parse("[mesh\nn0 = 3", k).is_err());
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            prop::sample::select(Experiment::ALL.to_vec()),
            1usize..=3,
            any::<u64>(),
            prop::collection::vec(1e-4f64..10.0, 1..5),
            (0.0f64..5.0, 1e-3f64..20.0, 0.0f64..2.0, 1e-5f64..1.0),
            (any::<bool>(), 2usize..6, 1usize..9),
            prop::option::of(1usize..=10),
        )
            .prop_map(|(e, k, seed, mu, (rho, sigma, lambda, delta), (nl, levels, n0), qd)| {
                let mut c = RunConfig::defaults(e);
                c.degree = k;
                c.seed = seed;
                c.mu = mu;
                c.rho = rho;
                c.sigma = sigma;
                c.lambda = lambda;
                c.delta = delta;
                c.nonlinear = nl;
                c.levels = levels;
                c.n0 = n0;
                c.quad_degree = qd;
                c
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_parse_is_identity(c in arb_config()) {
            let once = RunConfig::parse(&c.to_text(), None).unwrap();
            prop_assert_eq!(&once, &c);
            let twice = RunConfig::parse(&once.to_text(), None).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
