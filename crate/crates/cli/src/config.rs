//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cwlab_core::ns_solver::PerturbSpec;
use cwlab_core::params::{KappaCoupling, PhysParams, ProfileParams, RawParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("contact front reaches x = {front} at the horizon, beyond 0.9·L = {limit}")]
    LayerContainmentViolated { front: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ProfileDecay,
    Stability,
    KappaLimit,
    VerifyProfile,
    Theta0Checks,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::ProfileDecay,
        Scenario::Stability,
        Scenario::KappaLimit,
        Scenario::VerifyProfile,
        Scenario::Theta0Checks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ProfileDecay => "profile-decay",
            Scenario::Stability => "stability",
            Scenario::KappaLimit => "kappa-limit",
            Scenario::VerifyProfile => "verify-profile",
            Scenario::Theta0Checks => "theta0-checks",
        }
    }

    fn default_horizon(self) -> f64 {
        match self {
            Scenario::Stability => 100.0,
            Scenario::KappaLimit => 5.0,
            Scenario::VerifyProfile => 1.0,
            Scenario::ProfileDecay | Scenario::Theta0Checks => 200.0,
        }
    }

    fn default_length(self) -> f64 {
        match self {
            Scenario::VerifyProfile => 100.0,
            _ => 400.0,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!(
                    "unknown scenario `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub raw: RawParams<f64>,
    pub alpha: f64,
    pub delta0: f64,
    pub coupling: KappaCoupling<f64>,
    pub perturb: PerturbSpec<f64>,
    pub length: f64,
    pub cells: usize,
    pub horizon: f64,
    pub cfl_safety: f64,
    pub sample_interval: f64,
    pub output_dir: PathBuf,
    pub kappa_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub fit_t0: f64,
    pub fit_t1: f64,
}

const KEYS: &[(&str, &str)] = &[
    (
        "scenario",
        "profile-decay | stability | kappa-limit | verify-profile | theta0-checks",
    ),
    ("R", "gas constant"),
    ("gamma", "adiabatic exponent, > 1"),
    ("mu", "viscosity"),
    ("kappa", "heat conductivity"),
    ("theta_minus", "boundary temperature"),
    ("theta_plus", "far-field temperature"),
    ("v_minus", "boundary specific volume"),
    ("u_b", "inflow velocity, > 0"),
    ("alpha", "initial profile scale"),
    ("delta0", "initial profile exponent, in (0, 1]"),
    ("coupling_exponent", "kappa-limit: alpha = kappa^exponent"),
    ("amp_phi", "volume perturbation amplitude"),
    ("amp_psi", "velocity perturbation amplitude"),
    ("amp_zeta", "temperature perturbation amplitude"),
    ("width", "perturbation width"),
    ("center", "perturbation start"),
    ("L", "domain length (scenario default)"),
    ("n", "number of cells"),
    ("T", "horizon (scenario default)"),
    ("cfl_safety", "time-step safety factor in (0, 1]"),
    ("sample_interval", "time between recorded samples"),
    ("output_dir", "directory for outputs"),
    ("kappa_list", "comma-separated conductivities"),
    ("p_list", "comma-separated L^p exponents for the velocity"),
    ("fit_t0", "start of the decay fit window"),
    ("fit_t1", "end of the decay fit window"),
];

/// Parsed but unresolved document: key → (value, line).
#[derive(Debug, Clone, Default)]
pub struct ConfigDoc {
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: "empty key or value".into(),
                });
            }
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if entries
                .insert(key.to_string(), (value.to_string(), line))
                .is_some()
            {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(default),
            Some((v, _)) => v.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
                key: key.into(),
                reason: format!("`{v}`: {e}"),
            }),
        }
    }

    fn get_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some((v, _)) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse::<f64>()
                        .map_err(|e| ConfigError::InvalidValue {
                            key: key.into(),
                            reason: format!("`{item}`: {e}"),
                        })
                })
                .collect(),
        }
    }

    /// Applies defaults (some depend on the scenario) and validates.
    pub fn resolve(&self, scenario_override: Option<Scenario>) -> Result<RunConfig, ConfigError> {
        let scenario = match scenario_override {
            Some(s) => s,
            None => self
                .get::<String>("scenario", Scenario::ProfileDecay.name().into())?
                .parse()
                .map_err(|reason| ConfigError::InvalidValue {
                    key: "scenario".into(),
                    reason,
                })?,
        };
        let d = RawParams::<f64>::default();
        let raw = RawParams {
            r: self.get("R", d.r)?,
            gamma: self.get("gamma", d.gamma)?,
            mu: self.get("mu", d.mu)?,
            kappa: self.get("kappa", d.kappa)?,
            theta_minus: self.get("theta_minus", d.theta_minus)?,
            theta_plus: self.get("theta_plus", d.theta_plus)?,
            v_minus: self.get("v_minus", d.v_minus)?,
            u_b: self.get("u_b", d.u_b)?,
        };
        let dp = ProfileParams::<f64>::default();
        let pd = PerturbSpec::<f64>::default();
        let cfg = RunConfig {
            scenario,
            raw,
            alpha: self.get("alpha", dp.alpha())?,
            delta0: self.get("delta0", dp.delta0())?,
            coupling: KappaCoupling {
                exponent: self.get(
                    "coupling_exponent",
                    KappaCoupling::<f64>::default().exponent,
                )?,
            },
            perturb: PerturbSpec {
                amp_phi: self.get("amp_phi", pd.amp_phi)?,
                amp_psi: self.get("amp_psi", pd.amp_psi)?,
                amp_zeta: self.get("amp_zeta", pd.amp_zeta)?,
                width: self.get("width", pd.width)?,
                center: self.get("center", pd.center)?,
            },
            length: self.get("L", scenario.default_length())?,
            cells: self.get("n", 4000)?,
            horizon: self.get("T", scenario.default_horizon())?,
            cfl_safety: self.get("cfl_safety", 0.4)?,
            sample_interval: self.get("sample_interval", 2.0)?,
            output_dir: PathBuf::from(self.get::<String>("output_dir", "cwlab-out".into())?),
            kappa_list: self.get_list("kappa_list", &[1.0, 0.5, 0.25, 0.125])?,
            p_list: self.get_list("p_list", &[2.0, 4.0])?,
            fit_t0: self.get("fit_t0", 20.0)?,
            fit_t1: self.get("fit_t1", 200.0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn params(&self) -> PhysParams<f64> {
        PhysParams::build(self.raw).expect("validated")
    }

    pub fn profile_params(&self) -> ProfileParams<f64> {
        ProfileParams::new(self.alpha, self.delta0).expect("validated")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let params = PhysParams::build(self.raw).map_err(|e| {
            let key = match &e {
                cwlab_core::Error::GammaOutOfRange(_) => "gamma",
                cwlab_core::Error::NonPositiveParameter(name) => name,
                _ => "params",
            };
            invalid(key, e.to_string())
        })?;
        ProfileParams::new(self.alpha, self.delta0).map_err(|e| match e {
            cwlab_core::Error::InvalidProfileParameter { name, reason } => invalid(name, reason),
            other => invalid("alpha", other.to_string()),
        })?;
        if !self.coupling.exponent.is_finite() {
            return Err(invalid("coupling_exponent", "must be finite"));
        }
        if !(self.perturb.width > 0.0) {
            return Err(invalid("width", "must be > 0"));
        }
        if !(self.perturb.center >= 0.0) {
            return Err(invalid("center", "must be >= 0"));
        }
        for (key, v) in [
            ("amp_phi", self.perturb.amp_phi),
            ("amp_psi", self.perturb.amp_psi),
            ("amp_zeta", self.perturb.amp_zeta),
        ] {
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(invalid("L", "must be > 0"));
        }
        if self.cells < 8 {
            return Err(invalid("n", "must be >= 8"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("T", "must be > 0"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(invalid("cfl_safety", "must lie in (0, 1]"));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(invalid("sample_interval", "must be > 0"));
        }
        if self.kappa_list.is_empty()
            || self.kappa_list.iter().any(|k| !(*k > 0.0 && k.is_finite()))
        {
            return Err(invalid("kappa_list", "needs at least one positive value"));
        }
        if self.p_list.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
            return Err(invalid("p_list", "exponents must be finite and >= 1"));
        }
        if !(self.fit_t0 >= 1.0 && self.fit_t1 > self.fit_t0) {
            return Err(invalid("fit_t0", "fit window needs 1 <= fit_t0 < fit_t1"));
        }
        let front = params.s().abs() * self.horizon;
        let limit = 0.9 * self.length;
        if front > limit {
            return Err(ConfigError::LayerContainmentViolated { front, limit });
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    ConfigDoc::parse(text)?.resolve(None)
}

/// Reads `path`; `scenario` replaces the document's own choice when given.
pub fn load_config(path: &Path, scenario: Option<Scenario>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ConfigDoc::parse(&text)?.resolve(scenario)
}

/// The default configuration as a commented document.
pub fn defaults_text() -> String {
    let cfg = parse_config("").expect("defaults are valid");
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let values: Vec<(&str, String)> = vec![
        ("scenario", cfg.scenario.to_string()),
        ("R", format!("{:?}", cfg.raw.r)),
        ("gamma", format!("{:?}", cfg.raw.gamma)),
        ("mu", format!("{:?}", cfg.raw.mu)),
        ("kappa", format!("{:?}", cfg.raw.kappa)),
        ("theta_minus", format!("{:?}", cfg.raw.theta_minus)),
        ("theta_plus", format!("{:?}", cfg.raw.theta_plus)),
        ("v_minus", format!("{:?}", cfg.raw.v_minus)),
        ("u_b", format!("{:?}", cfg.raw.u_b)),
        ("alpha", format!("{:?}", cfg.alpha)),
        ("delta0", format!("{:?}", cfg.delta0)),
        ("coupling_exponent", format!("{:?}", cfg.coupling.exponent)),
        ("amp_phi", format!("{:?}", cfg.perturb.amp_phi)),
        ("amp_psi", format!("{:?}", cfg.perturb.amp_psi)),
        ("amp_zeta", format!("{:?}", cfg.perturb.amp_zeta)),
        ("width", format!("{:?}", cfg.perturb.width)),
        ("center", format!("{:?}", cfg.perturb.center)),
        ("L", format!("{:?}", cfg.length)),
        ("n", cfg.cells.to_string()),
        ("T", format!("{:?}", cfg.horizon)),
        ("cfl_safety", format!("{:?}", cfg.cfl_safety)),
        ("sample_interval", format!("{:?}", cfg.sample_interval)),
        ("output_dir", cfg.output_dir.display().to_string()),
        ("kappa_list", list(&cfg.kappa_list)),
        ("p_list", list(&cfg.p_list)),
        ("fit_t0", format!("{:?}", cfg.fit_t0)),
        ("fit_t1", format!("{:?}", cfg.fit_t1)),
    ];
    let mut out = String::from(
        "# cwlab run configuration; every key is optional.\n\
         # T defaults to 100 for stability, 5 for kappa-limit and 1 for\n\
         # verify-profile; L defaults to 100 for verify-profile.\n",
    );
    for ((key, value), (_, help)) in values.iter().zip(KEYS) {
        out.push_str(&format!("{key} = {value}  # {help}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.scenario, Scenario::ProfileDecay);
        assert_eq!(cfg.raw, RawParams::default());
        assert_eq!((cfg.length, cfg.cells, cfg.horizon), (400.0, 4000, 200.0));
    }

    #[test]
    fn defaults_text_round_trips() {
        let cfg = parse_config(&defaults_text()).unwrap();
        assert_eq!(cfg, parse_config("").unwrap());
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config("# header\n\n  mu = 0.2 # trailing\nscenario=stability\n").unwrap();
        assert_eq!(cfg.raw.mu, 0.2);
        assert_eq!(cfg.scenario, Scenario::Stability);
        assert_eq!(cfg.horizon, 100.0);
    }

    #[test]
    fn errors_carry_context() {
        assert!(matches!(
            parse_config("mu 0.1"),
            Err(ConfigError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("\nfoo = 1"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("gamma = 1.0"),
            Err(ConfigError::InvalidValue { ref key, .. }) if key == "gamma"
        ));
        assert!(matches!(
            parse_config("T = 500"),
            Err(ConfigError::LayerContainmentViolated { .. })
        ));
        assert!(matches!(
            parse_config("n = many"),
            Err(ConfigError::InvalidValue { ref key, .. }) if key == "n"
        ));
        assert!(matches!(
            parse_config("mu = 1\nmu = 2"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn override_changes_scenario_defaults() {
        let doc = ConfigDoc::parse("").unwrap();
        let cfg = doc.resolve(Some(Scenario::VerifyProfile)).unwrap();
        assert_eq!((cfg.length, cfg.horizon), (100.0, 1.0));
    }
}
