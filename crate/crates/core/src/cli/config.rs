use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bell::MIN_PANELS;
use crate::evolution::{Branch, MAX_SHIFT_SITES};

/// Largest ring accepted by `lightcone`; the scan is quadratic in `2^l`.
pub const MAX_CONE_SITES: usize = 8;
/// Longest orbit `cogwheel` will list.
pub const MAX_ORBIT_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Cogwheel,
    Spectrum,
    Conserve,
    Beables,
    Lightcone,
    Bell,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Cogwheel => "cogwheel",
            Subcommand::Spectrum => "spectrum",
            Subcommand::Conserve => "conserve",
            Subcommand::Beables => "beables",
            Subcommand::Lightcone => "lightcone",
            Subcommand::Bell => "bell",
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            Subcommand::Cogwheel => &["n", "steps", "start"],
            Subcommand::Spectrum => &["n", "universe", "dt", "branch"],
            Subcommand::Conserve => &["dim", "steps", "trials", "mode", "tol"],
            Subcommand::Beables => &["l", "universe", "ops", "horizon", "tol"],
            Subcommand::Lightcone => &["l", "tmax", "probes"],
            Subcommand::Bell => &["a", "b", "aprime", "bprime", "method", "samples", "grid"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConserveMode {
    /// Sorted amplitude moduli must be preserved.
    #[default]
    Ontology,
    /// Sorted Born probabilities must be preserved.
    Uncertainty,
    /// Random dense unitaries; passes when they break the law.
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BellMethod {
    Mc,
    #[default]
    Quad,
}

/// Every subcommand's arguments. Which keys are legal depends on the
/// subcommand; see [`validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ConserveMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ops: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tmax: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aprime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bprime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<BellMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Parameters {
    /// Keys that carry a value.
    pub fn present_keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Values from `top` win over values already set.
    pub fn overlay(&mut self, top: &Parameters) {
        overlay!(
            self, top, n, steps, start, universe, dt, branch, dim, trials, mode, tol, l, ops,
            horizon, tmax, probes, a, b, aprime, bprime, method, samples, grid
        );
    }
}

/// One experiment: what to run, with which arguments, and where the output
/// goes. Stored on disk as JSON with exactly these keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            parameters: Parameters::default(),
            seed: 0,
            output_format: OutputFormat::Json,
            output_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))
    }
}

/// A problem with one configuration key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Probe pairs for `lightcone`, written `XZ,ZZ`.
pub fn parse_probe_pairs(text: &str) -> Result<Vec<(char, char)>, String> {
    text.split(',')
        .map(|pair| {
            let letters: Vec<char> = pair.trim().chars().map(|c| c.to_ascii_uppercase()).collect();
            match letters.as_slice() {
                [a, b] if "XYZN".contains(*a) && "XYZN".contains(*b) => Ok((*a, *b)),
                _ => Err(format!("bad probe pair {pair:?}; expected two of X, Y, Z, N")),
            }
        })
        .collect()
}

fn positive(errors: &mut Vec<ConfigError>, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        if !(v > 0.0 && v.is_finite()) {
            errors.push(ConfigError::new(key, format!("must be positive and finite, got {v}")));
        }
    }
}

fn finite(errors: &mut Vec<ConfigError>, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        if !v.is_finite() {
            errors.push(ConfigError::new(key, format!("must be finite, got {v}")));
        }
    }
}

/// Checks `config` without touching the filesystem and reports every
/// problem found.
pub fn validate(config: &ExperimentConfig) -> Result<(), Vec<ConfigError>> {
    let mut errors = Vec::new();
    let p = &config.parameters;
    let sub = config.subcommand;
    for key in p.present_keys() {
        if !sub.allowed().contains(&key.as_str()) {
            errors.push(ConfigError::new(
                &key,
                format!("not a parameter of {}; expected one of {}", sub.name(), sub.allowed().join(", ")),
            ));
        }
    }
    let required = |errors: &mut Vec<ConfigError>, key: &str, present: bool| {
        if !present {
            errors.push(ConfigError::new(key, format!("required by {}", sub.name())));
        }
    };
    match sub {
        Subcommand::Cogwheel => {
            required(&mut errors, "n", p.n.is_some());
            if p.n == Some(0) {
                errors.push(ConfigError::new("n", "must be at least 1"));
            }
            if let Some(steps) = p.steps {
                if steps > MAX_ORBIT_STEPS {
                    errors.push(ConfigError::new("steps", format!("must be at most {MAX_ORBIT_STEPS}, got {steps}")));
                }
            }
            if let (Some(n), Some(start)) = (p.n, p.start) {
                if start >= n {
                    errors.push(ConfigError::new("start", format!("must be below n = {n}, got {start}")));
                }
            }
        }
        Subcommand::Spectrum => {
            match (p.n, &p.universe) {
                (None, None) => required(&mut errors, "n", false),
                (Some(_), Some(_)) => errors.push(ConfigError::new("universe", "give either n or universe, not both")),
                _ => {}
            }
            if p.n == Some(0) {
                errors.push(ConfigError::new("n", "must be at least 1"));
            }
            positive(&mut errors, "dt", p.dt);
        }
        Subcommand::Conserve => {
            required(&mut errors, "dim", p.dim.is_some());
            if p.dim == Some(0) {
                errors.push(ConfigError::new("dim", "must be at least 1"));
            }
            if p.trials == Some(0) {
                errors.push(ConfigError::new("trials", "must be at least 1"));
            }
            positive(&mut errors, "tol", p.tol);
        }
        Subcommand::Beables => {
            match (p.l, &p.universe) {
                (None, None) => required(&mut errors, "l", false),
                (Some(_), Some(_)) => errors.push(ConfigError::new("universe", "give either l or universe, not both")),
                _ => {}
            }
            if let Some(l) = p.l {
                if !(1..=MAX_SHIFT_SITES).contains(&l) {
                    errors.push(ConfigError::new("l", format!("must be in 1..={MAX_SHIFT_SITES}, got {l}")));
                }
            }
            if let Some(ops) = &p.ops {
                if ops != "diagonal" && p.l.is_none() {
                    errors.push(ConfigError::new("ops", "site probes need a bit-shift universe (l)"));
                }
            }
            positive(&mut errors, "tol", p.tol);
        }
        Subcommand::Lightcone => {
            required(&mut errors, "l", p.l.is_some());
            if let Some(l) = p.l {
                if !(1..=MAX_CONE_SITES).contains(&l) {
                    errors.push(ConfigError::new("l", format!("must be in 1..={MAX_CONE_SITES}, got {l}")));
                }
            }
            if let Some(t) = p.tmax {
                if t < 0 {
                    errors.push(ConfigError::new("tmax", format!("must be nonnegative, got {t}")));
                }
            }
            if let Some(text) = &p.probes {
                if let Err(e) = parse_probe_pairs(text) {
                    errors.push(ConfigError::new("probes", e));
                }
            }
        }
        Subcommand::Bell => {
            for (key, v) in [("a", p.a), ("b", p.b), ("aprime", p.aprime), ("bprime", p.bprime)] {
                finite(&mut errors, key, v);
            }
            if p.samples == Some(0) {
                errors.push(ConfigError::new("samples", "must be at least 1"));
            }
            if let Some(g) = p.grid {
                if g < MIN_PANELS {
                    errors.push(ConfigError::new("grid", format!("out of range: must be at least {MIN_PANELS}, got {g}")));
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
