use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::bell::{self, ChshAngles, CorrelationEstimate, Method};
use crate::cli::config::{
    parse_probe_pairs, validate, BellMethod, ConfigError, ConserveMode, ExperimentConfig, OutputFormat, Subcommand,
};
use crate::conservation::{run_control_trials, run_trials, Fingerprint, TrialSuite, Verdict};
use crate::error::Error;
use crate::evolution::{
    bit_shift_universe, cogwheel, extract_hamiltonian, Branch, GeneralizedPermutation, TimeStep, UnitaryMatrix,
    UniverseDescription,
};
use crate::linalg::max_abs_diff;
use crate::operators::{
    cone_map, default_horizon, diagonal_observables, is_beable_set, BeableVerdict, ConeRow, Observable, Separation,
};
use crate::state::{StateClass, StateVector, DEFAULT_CLASSIFY_TOL};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `spectrum` skips the dense `exp(-i H dt)` round trip above this size.
pub const MAX_ROUNDTRIP_DIM: usize = 512;
pub const ROUNDTRIP_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const DEFAULT_CONSERVE_TOL: f64 = 1e-12;
pub const DEFAULT_CONTROL_THRESHOLD: f64 = crate::conservation::CONTROL_THRESHOLD;
/// Fraction of control trials that must break the law.
pub const CONTROL_PASS_RATE: f64 = 0.99;
pub const DEFAULT_BEABLE_TOL: f64 = 1e-12;
pub const SPACELIKE_TOL: f64 = 1e-12;

/// Why a run did not produce a verdict.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration; exit status 2.
    Usage(Vec<ConfigError>),
    /// The computation itself failed; exit status 1.
    Failed(Error),
}

impl From<Vec<ConfigError>> for RunError {
    fn from(e: Vec<ConfigError>) -> Self {
        RunError::Usage(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Eigensolver(_) => RunError::Failed(e),
            other => RunError::Usage(vec![ConfigError::new("input", other.to_string())]),
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(errors) => {
                let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
                f.write_str(&lines.join("\n"))
            }
            RunError::Failed(e) => write!(f, "{e}"),
        }
    }
}

/// Rendered artifact plus the verdict that decides the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub verdict: Verdict,
    pub text: String,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.is_pass() { 0 } else { 1 }
    }
}

/// Fills every documented default into `config.parameters`.
pub fn resolve(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    let p = &mut c.parameters;
    match c.subcommand {
        Subcommand::Cogwheel => {
            p.steps = p.steps.or(p.n.map(|n| n as u64));
            p.start = p.start.or(Some(0));
        }
        Subcommand::Spectrum => {
            p.dt = p.dt.or(Some(1.0));
            p.branch = p.branch.or(Some(Branch::default()));
        }
        Subcommand::Conserve => {
            let mode = p.mode.unwrap_or_default();
            p.mode = Some(mode);
            if mode != ConserveMode::Control {
                p.steps = p.steps.or(Some(100));
            }
            p.trials = p.trials.or(Some(1000));
            p.tol = p.tol.or(Some(match mode {
                ConserveMode::Control => DEFAULT_CONTROL_THRESHOLD,
                _ => DEFAULT_CONSERVE_TOL,
            }));
        }
        Subcommand::Beables => {
            p.ops = p.ops.clone().or(Some("diagonal".into()));
            p.tol = p.tol.or(Some(DEFAULT_BEABLE_TOL));
        }
        Subcommand::Lightcone => {
            p.tmax = p.tmax.or(p.l.map(|l| l as i64));
            p.probes = p.probes.clone().or(Some("XZ".into()));
        }
        Subcommand::Bell => {
            p.a = p.a.or(Some(0.0));
            p.b = p.b.or(Some(22.5));
            p.aprime = p.aprime.or(Some(45.0));
            p.bprime = p.bprime.or(Some(67.5));
            let method = p.method.unwrap_or_default();
            p.method = Some(method);
            match method {
                BellMethod::Mc => p.samples = p.samples.or(Some(1_000_000)),
                BellMethod::Quad => p.grid = p.grid.or(Some(bell::REFERENCE_PANELS)),
            }
        }
    }
    c
}

#[derive(Serialize)]
struct Header<'a> {
    tool_version: &'static str,
    subcommand: &'static str,
    config_echo: &'a ExperimentConfig,
    seed: u64,
    verdict: Verdict,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    #[serde(flatten)]
    header: Header<'a>,
    #[serde(flatten)]
    result: &'a R,
    meta: Meta,
}

#[derive(Serialize)]
struct Meta {
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    total_ms: f64,
}

/// A subcommand's result: its verdict, JSON body and CSV table.
trait Artifact: Serialize {
    fn verdict(&self) -> Verdict;
    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>;
}

fn render<R: Artifact>(config: &ExperimentConfig, result: &R, started: Instant) -> RunOutput {
    let header = Header {
        tool_version: TOOL_VERSION,
        subcommand: config.subcommand.name(),
        config_echo: config,
        seed: config.seed,
        verdict: result.verdict(),
    };
    let text = match config.output_format {
        OutputFormat::Json => {
            let envelope = Envelope {
                header,
                result,
                meta: Meta {
                    timings: Timings {
                        total_ms: started.elapsed().as_secs_f64() * 1e3,
                    },
                },
            };
            let mut s = serde_json::to_string_pretty(&envelope).expect("output serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            buf.extend_from_slice(b"# config: ");
            serde_json::to_writer(&mut buf, &header).expect("header serializes");
            buf.push(b'\n');
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                result.write_csv(&mut w).expect("writing to memory");
                w.flush().expect("writing to memory");
            }
            String::from_utf8(buf).expect("csv output is utf-8")
        }
    };
    RunOutput {
        verdict: result.verdict(),
        text,
    }
}

/// Validates, resolves defaults and runs one experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    validate(config)?;
    let started = Instant::now();
    let mut config = resolve(config);
    match config.subcommand {
        Subcommand::Cogwheel => Ok(render(&config, &run_cogwheel(&config)?, started)),
        Subcommand::Spectrum => Ok(render(&config, &run_spectrum(&config)?, started)),
        Subcommand::Conserve => Ok(render(&config, &run_conserve(&config)?, started)),
        Subcommand::Beables => {
            let result = run_beables(&mut config)?;
            Ok(render(&config, &result, started))
        }
        Subcommand::Lightcone => Ok(render(&config, &run_lightcone(&config)?, started)),
        Subcommand::Bell => Ok(render(&config, &run_bell(&config)?, started)),
    }
}

fn load_universe(path: &std::path::Path) -> Result<GeneralizedPermutation, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::Usage(vec![ConfigError::new("universe", format!("cannot read {}: {e}", path.display()))])
    })?;
    UniverseDescription::from_json(&text)
        .and_then(UniverseDescription::into_permutation)
        .map_err(|e| RunError::Usage(vec![ConfigError::new("universe", e.to_string())]))
}

#[derive(Serialize)]
struct CogwheelResult {
    dim: usize,
    period: u128,
    start: usize,
    steps: u64,
    final_position: usize,
    final_class: StateClass,
    returns_at_period: bool,
    orbit: Vec<usize>,
}

impl Artifact for CogwheelResult {
    fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.returns_at_period && self.final_class.is_ontological())
    }

    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()> {
        w.write_record(["t", "position"])?;
        for (t, pos) in self.orbit.iter().enumerate() {
            w.write_record([t.to_string(), pos.to_string()])?;
        }
        Ok(())
    }
}

fn run_cogwheel(config: &ExperimentConfig) -> Result<CogwheelResult, RunError> {
    let p = &config.parameters;
    let (n, steps, start) = (p.n.unwrap_or(1), p.steps.unwrap_or(0), p.start.unwrap_or(0));
    let wheel = cogwheel(n)?;
    let period = wheel.period()?;
    let mut orbit = Vec::with_capacity(steps as usize + 1);
    let mut pos = start;
    orbit.push(pos);
    for _ in 0..steps {
        pos = wheel.target(pos);
        orbit.push(pos);
    }
    let fin = wheel.evolve(&StateVector::basis(n, start)?, steps)?;
    let (mut first_return, mut q) = (1u128, wheel.target(start));
    while q != start {
        q = wheel.target(q);
        first_return += 1;
    }
    Ok(CogwheelResult {
        dim: n,
        period,
        start,
        steps,
        final_position: pos,
        final_class: fin.classify(DEFAULT_CLASSIFY_TOL)?,
        returns_at_period: first_return == period,
        orbit,
    })
}

#[derive(Serialize)]
struct SpectrumResult {
    dim: usize,
    dt: f64,
    branch: Branch,
    period: Option<u128>,
    eigenphases: Vec<f64>,
    energies: Vec<f64>,
    hermiticity_deviation: f64,
    roundtrip_deviation: Option<f64>,
}

impl Artifact for SpectrumResult {
    fn verdict(&self) -> Verdict {
        let roundtrip = self.roundtrip_deviation.is_none_or(|d| d <= ROUNDTRIP_TOL);
        let in_branch = self.eigenphases.iter().all(|&p| self.branch.contains(p));
        Verdict::from_bool(self.hermiticity_deviation <= HERMITIAN_TOL && roundtrip && in_branch)
    }

    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()> {
        w.write_record(["k", "eigenphase", "energy"])?;
        for (k, (phi, e)) in self.eigenphases.iter().zip(&self.energies).enumerate() {
            w.write_record([k.to_string(), format!("{phi:?}"), format!("{e:?}")])?;
        }
        Ok(())
    }
}

fn run_spectrum(config: &ExperimentConfig) -> Result<SpectrumResult, RunError> {
    let p = &config.parameters;
    let perm = match (&p.universe, p.n) {
        (Some(path), _) => load_universe(path)?,
        (None, n) => cogwheel(n.unwrap_or(1))?,
    };
    let dt = TimeStep::new(p.dt.unwrap_or(1.0))?;
    let branch = p.branch.unwrap_or_default();
    let u = UnitaryMatrix::from_permutation(&perm);
    let h = extract_hamiltonian(&u, dt, branch)?;
    let mut eigenphases: Vec<f64> = h.energies.iter().map(|e| e * dt.get()).collect();
    eigenphases.sort_by(f64::total_cmp);
    let mut energies = h.energies.clone();
    energies.sort_by(f64::total_cmp);
    let roundtrip_deviation =
        (perm.dim() <= MAX_ROUNDTRIP_DIM).then(|| max_abs_diff(&h.evolution_operator(), u.matrix()));
    Ok(SpectrumResult {
        dim: perm.dim(),
        dt: dt.get(),
        branch,
        period: perm.period().ok(),
        eigenphases,
        energies,
        hermiticity_deviation: h.hermiticity_deviation(),
        roundtrip_deviation,
    })
}

#[derive(Serialize)]
struct ConserveResult {
    mode: ConserveMode,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<u64>,
    trials: usize,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_transport_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ontological_persisted: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failures: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    median_deviation: Option<f64>,
    #[serde(skip)]
    verdict: Verdict,
}

impl Artifact for ConserveResult {
    fn verdict(&self) -> Verdict {
        self.verdict
    }

    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()> {
        w.serialize(self)
    }
}

fn run_conserve(config: &ExperimentConfig) -> Result<ConserveResult, RunError> {
    let p = &config.parameters;
    let dim = p.dim.unwrap_or(1);
    let trials = p.trials.unwrap_or(1);
    let tol = p.tol.unwrap_or(DEFAULT_CONSERVE_TOL);
    let mode = p.mode.unwrap_or_default();
    let fingerprint = match mode {
        ConserveMode::Ontology => Fingerprint::Amplitudes,
        ConserveMode::Uncertainty => Fingerprint::Probabilities,
        ConserveMode::Control => {
            let s = run_control_trials(dim, trials, config.seed, tol)?;
            let pass = s.detected as f64 >= CONTROL_PASS_RATE * trials as f64;
            return Ok(ConserveResult {
                mode,
                dim,
                steps: None,
                trials,
                tolerance: tol,
                max_deviation: None,
                max_transport_deviation: None,
                ontological_persisted: None,
                failures: None,
                detected: Some(s.detected),
                min_deviation: Some(s.min_deviation),
                median_deviation: Some(s.median_deviation),
                verdict: Verdict::from_bool(pass),
            });
        }
    };
    let steps = p.steps.unwrap_or(0);
    let s = run_trials(&TrialSuite {
        dims: dim..=dim,
        steps: steps..=steps,
        trials,
        seed: config.seed,
        tol,
        fingerprint,
    })?;
    Ok(ConserveResult {
        mode,
        dim,
        steps: Some(steps),
        trials,
        tolerance: tol,
        max_deviation: Some(s.max_deviation),
        max_transport_deviation: Some(s.max_transport_deviation),
        ontological_persisted: Some(s.ontological_persisted),
        failures: Some(s.failures),
        detected: None,
        min_deviation: None,
        median_deviation: None,
        verdict: s.verdict,
    })
}

#[derive(Serialize)]
struct Violation {
    first: String,
    second: String,
    s: u64,
    t: u64,
    commutator: f64,
}

#[derive(Serialize)]
struct BeablesResult {
    dim: usize,
    operators: usize,
    horizon: u64,
    tolerance: f64,
    violation: Option<Violation>,
}

impl Artifact for BeablesResult {
    fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.violation.is_none())
    }

    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()> {
        w.write_record(["dim", "operators", "horizon", "tolerance", "first", "second", "s", "t", "commutator"])?;
        let mut row = vec![
            self.dim.to_string(),
            self.operators.to_string(),
            self.horizon.to_string(),
            format!("{:?}", self.tolerance),
        ];
        match &self.violation {
            Some(v) => row.extend([
                v.first.clone(),
                v.second.clone(),
                v.s.to_string(),
                v.t.to_string(),
                format!("{:?}", v.commutator),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(row)
    }
}

/// Resolves the horizon into `config` as well, since it depends on the
/// universe.
fn run_beables(config: &mut ExperimentConfig) -> Result<BeablesResult, RunError> {
    let p = &config.parameters;
    let perm = match (&p.universe, p.l) {
        (Some(path), _) => load_universe(path)?,
        (None, l) => bit_shift_universe(l.unwrap_or(1))?,
    };
    let u = UnitaryMatrix::from_permutation(&perm);
    let ops_spec = p.ops.clone().unwrap_or_else(|| "diagonal".into());
    let ops: Vec<Observable> = if ops_spec == "diagonal" {
        diagonal_observables(perm.dim())
    } else {
        let sites = p.l.unwrap_or(1);
        ops_spec
            .split(',')
            .map(|s| Observable::parse_probe(s.trim(), sites))
            .collect::<crate::Result<_>>()
            .map_err(|e| RunError::Usage(vec![ConfigError::new("ops", e.to_string())]))?
    };
    let horizon = p.horizon.unwrap_or_else(|| default_horizon(&u));
    let tol = p.tol.unwrap_or(DEFAULT_BEABLE_TOL);
    config.parameters.horizon = Some(horizon);
    let violation = match is_beable_set(&ops, &u, horizon, tol)? {
        BeableVerdict::Pass => None,
        BeableVerdict::Fail { first, second, s, t, commutator } => Some(Violation {
            first: ops[first].label().to_string(),
            second: ops[second].label().to_string(),
            s,
            t,
            commutator,
        }),
    };
    Ok(BeablesResult {
        dim: perm.dim(),
        operators: ops.len(),
        horizon,
        tolerance: tol,
        violation,
    })
}

#[derive(Serialize)]
struct LightconeResult {
    sites: usize,
    tmax: i64,
    spacelike_max: f64,
    /// Smallest commutator over lightlike pairs on the directed cone.
    directed_lightlike_min: Option<f64>,
    /// Largest commutator over lightlike pairs against the propagation
    /// direction.
    counter_lightlike_max: Option<f64>,
    rows: Vec<ConeRow>,
}

impl Artifact for LightconeResult {
    fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.spacelike_max <= SPACELIKE_TOL)
    }

    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()> {
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "x", "x_prime", "t", "t_prime", "separation", "commutator_norm", "probe_a", "probe_b",
                "on_directed_cone",
            ])?;
        }
        Ok(())
    }
}

fn run_lightcone(config: &ExperimentConfig) -> Result<LightconeResult, RunError> {
    let p = &config.parameters;
    let sites = p.l.unwrap_or(1);
    let tmax = p.tmax.unwrap_or(0);
    let pairs = parse_probe_pairs(p.probes.as_deref().unwrap_or("XZ"))
        .map_err(|e| RunError::Usage(vec![ConfigError::new("probes", e)]))?;
    let rows = cone_map(sites, tmax, &pairs)?;
    let fold_max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let spacelike_max = fold_max(
        &mut rows.iter().filter(|r| r.separation == Separation::Spacelike).map(|r| r.commutator_norm),
    )
    .unwrap_or(0.0);
    let lightlike = |directed: bool| {
        rows.iter()
            .filter(move |r| r.separation == Separation::Lightlike && r.on_directed_cone == directed)
            .map(|r| r.commutator_norm)
    };
    Ok(LightconeResult {
        sites,
        tmax,
        spacelike_max,
        directed_lightlike_min: fold_min(&mut lightlike(true)),
        counter_lightlike_max: fold_max(&mut lightlike(false)),
        rows,
    })
}

#[derive(Serialize)]
struct Components {
    ab: f64,
    abp: f64,
    apb: f64,
    apbp: f64,
}

impl Components {
    fn from(parts: [&CorrelationEstimate; 4], f: impl Fn(&CorrelationEstimate) -> f64) -> Self {
        Self {
            ab: f(parts[0]),
            abp: f(parts[1]),
            apb: f(parts[2]),
            apbp: f(parts[3]),
        }
    }
}

#[derive(Serialize)]
struct BellResult {
    method: BellMethod,
    n: u64,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "S_std_error")]
    s_std_error: f64,
    #[serde(rename = "E")]
    e: Components,
    std_error: Components,
    quantum_reference: Components,
    #[serde(rename = "quantum_reference_S")]
    quantum_reference_s: f64,
    classical_bound: f64,
    tsirelson_bound: f64,
    acceptance_rate: Option<f64>,
    #[serde(skip)]
    within_bounds: bool,
}

impl Artifact for BellResult {
    fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.within_bounds)
    }

    fn write_csv(&self, w: &mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()> {
        w.write_record(["quantity", "value", "std_error", "quantum_reference"])?;
        let rows = [
            ("ab", self.e.ab, self.std_error.ab, self.quantum_reference.ab),
            ("abp", self.e.abp, self.std_error.abp, self.quantum_reference.abp),
            ("apb", self.e.apb, self.std_error.apb, self.quantum_reference.apb),
            ("apbp", self.e.apbp, self.std_error.apbp, self.quantum_reference.apbp),
            ("S", self.s, self.s_std_error, self.quantum_reference_s),
        ];
        for (name, v, e, q) in rows {
            w.write_record([name.to_string(), format!("{v:?}"), format!("{e:?}"), format!("{q:?}")])?;
        }
        Ok(())
    }
}

fn run_bell(config: &ExperimentConfig) -> Result<BellResult, RunError> {
    let p = &config.parameters;
    let rad = |deg: Option<f64>| deg.unwrap_or(0.0) * PI / 180.0;
    let angles = ChshAngles {
        a: rad(p.a),
        a_prime: rad(p.aprime),
        b: rad(p.b),
        b_prime: rad(p.bprime),
    };
    let method_kind = p.method.unwrap_or_default();
    let method = match method_kind {
        BellMethod::Mc => Method::MonteCarlo {
            samples: p.samples.unwrap_or(1),
        },
        BellMethod::Quad => Method::Quadrature {
            panels: p.grid.unwrap_or(bell::REFERENCE_PANELS),
        },
    };
    let r = bell::chsh(angles, method, config.seed)?;
    let parts = [&r.ab, &r.abp, &r.apb, &r.apbp];
    let settings = [
        (angles.a, angles.b),
        (angles.a, angles.b_prime),
        (angles.a_prime, angles.b),
        (angles.a_prime, angles.b_prime),
    ];
    let acceptance_rate = match method_kind {
        BellMethod::Mc => {
            let accepted: f64 = parts.iter().map(|e| e.n as f64).sum();
            let proposed: f64 = parts.iter().map(|e| e.n as f64 / e.acceptance_rate.unwrap_or(1.0)).sum();
            Some(accepted / proposed)
        }
        BellMethod::Quad => None,
    };
    Ok(BellResult {
        method: method_kind,
        n: r.ab.n,
        s: r.s,
        s_std_error: r.s_std_error,
        e: Components::from(parts, |e| e.value),
        std_error: Components::from(parts, |e| e.std_error),
        quantum_reference: Components {
            ab: bell::quantum_reference(settings[0].0, settings[0].1),
            abp: bell::quantum_reference(settings[1].0, settings[1].1),
            apb: bell::quantum_reference(settings[2].0, settings[2].1),
            apbp: bell::quantum_reference(settings[3].0, settings[3].1),
        },
        quantum_reference_s: r.quantum_reference_s,
        classical_bound: r.classical_bound,
        tsirelson_bound: r.tsirelson_bound,
        acceptance_rate,
        within_bounds: parts.iter().all(|e| e.value.abs() <= 1.0 + 3.0 * e.std_error),
    })
}
