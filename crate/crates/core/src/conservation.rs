//! Conservation of ontology and of uncertainty under permutation dynamics.
//!
//! A permutation law moves amplitudes between basis labels without mixing
//! them, so the multiset of moduli (and of Born weights) is carried over
//! unchanged, and a basis state can only ever become another basis state.
//! A generic unitary mixes amplitudes; [`negative_control`] shows the
//! comparison catches that.

use std::ops::RangeInclusive;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{GeneralizedPermutation, UnitaryMatrix};
use crate::random::{random_permutation, random_state, random_unitary, substream};
use crate::state::{StateClass, StateVector, DEFAULT_CLASSIFY_TOL};

/// Default deviation tolerance for index-shuffling evolution.
pub const PERMUTATION_TOL: f64 = 1e-12;
/// Default deviation tolerance when evolution goes through a dense matrix.
pub const MATRIX_TOL: f64 = 1e-9;
/// Deviation above which a negative control counts as non-conserving.
pub const CONTROL_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Which fingerprint a report compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fingerprint {
    /// Sorted amplitude moduli.
    Amplitudes,
    /// Sorted Born probabilities.
    Probabilities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub fingerprint: Fingerprint,
    pub initial_class: StateClass,
    pub final_class: StateClass,
    pub initial_multiset: Vec<f64>,
    pub final_multiset: Vec<f64>,
    pub max_multiset_deviation: f64,
    /// Strict variant: `max_i | |final[Q(i)]| - |initial[i]| |` where `Q` is the
    /// composed law. Only available when the law is a known permutation.
    pub transport_deviation: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// The serialized form of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub initial_class: StateClass,
    pub final_class: StateClass,
    pub deviation: f64,
    pub verdict: Verdict,
}

impl ConservationReport {
    fn build(
        fingerprint: Fingerprint,
        initial: &StateVector,
        fin: &StateVector,
        transport_deviation: Option<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        let (initial_multiset, final_multiset) = match fingerprint {
            Fingerprint::Amplitudes => (initial.amplitude_multiset(), fin.amplitude_multiset()),
            Fingerprint::Probabilities => {
                (initial.probability_multiset(), fin.probability_multiset())
            }
        };
        let max_multiset_deviation = initial_multiset
            .iter()
            .zip(&final_multiset)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let initial_class = initial.classify(DEFAULT_CLASSIFY_TOL)?;
        let final_class = fin.classify(DEFAULT_CLASSIFY_TOL)?;
        let persists = !initial_class.is_ontological() || final_class.is_ontological();
        Ok(Self {
            fingerprint,
            initial_class,
            final_class,
            initial_multiset,
            final_multiset,
            max_multiset_deviation,
            transport_deviation,
            tolerance,
            verdict: Verdict::from_bool(max_multiset_deviation <= tolerance && persists),
        })
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            initial_class: self.initial_class,
            final_class: self.final_class,
            deviation: self.max_multiset_deviation,
            verdict: self.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.summary()).expect("report serializes")
    }
}

fn check_dims(p: &GeneralizedPermutation, psi: &StateVector) -> Result<()> {
    if p.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: psi.dim(),
        });
    }
    Ok(())
}

fn transport_deviation(
    p: &GeneralizedPermutation,
    initial: &StateVector,
    fin: &StateVector,
    steps: u64,
) -> f64 {
    let composed = p.power(i64::try_from(steps).unwrap_or(i64::MAX));
    initial
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| (fin.amplitudes()[composed.target(i)].norm() - a.norm()).abs())
        .fold(0.0, f64::max)
}

fn check_law(
    fingerprint: Fingerprint,
    p: &GeneralizedPermutation,
    psi: &StateVector,
    steps: u64,
    tol: f64,
) -> Result<ConservationReport> {
    check_dims(p, psi)?;
    let fin = p.evolve(psi, steps)?;
    let transport = transport_deviation(p, psi, &fin, steps);
    ConservationReport::build(fingerprint, psi, &fin, Some(transport), tol)
}

/// Evolves `psi` and compares the sorted amplitude moduli before and after.
pub fn check_ontology_conservation(
    p: &GeneralizedPermutation,
    psi: &StateVector,
    steps: u64,
    tol: f64,
) -> Result<ConservationReport> {
    check_law(Fingerprint::Amplitudes, p, psi, steps, tol)
}

/// Same as [`check_ontology_conservation`] but on the sorted Born weights.
pub fn check_uncertainty_conservation(
    p: &GeneralizedPermutation,
    psi: &StateVector,
    steps: u64,
    tol: f64,
) -> Result<ConservationReport> {
    check_law(Fingerprint::Probabilities, p, psi, steps, tol)
}

/// Runs the same comparison through a generic unitary. For anything that is
/// not a generalized permutation the verdict is expected to be `fail`.
pub fn negative_control(u: &UnitaryMatrix, psi: &StateVector, tol: f64) -> Result<ConservationReport> {
    if u.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: psi.dim(),
        });
    }
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let out = u.matrix() * v;
    let fin = StateVector::new(out.iter().copied().collect())?;
    ConservationReport::build(Fingerprint::Amplitudes, psi, &fin, None, tol)
}

/// Starts from basis state `e_index` and returns the Born distribution after
/// `steps` applications: always a point mass, with no collapse rule applied.
pub fn collapse_free_measurement(
    p: &GeneralizedPermutation,
    index: usize,
    steps: u64,
) -> Result<Vec<f64>> {
    let start = StateVector::basis(p.dim(), index)?;
    Ok(p.evolve(&start, steps)?.born_probabilities())
}

/// Parameters for a seeded batch of random conservation trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSuite {
    pub dims: RangeInclusive<usize>,
    pub steps: RangeInclusive<u64>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub fingerprint: Fingerprint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    /// Largest multiset deviation over the random superposed states.
    pub max_deviation: f64,
    /// Largest strict (index-transported) deviation.
    pub max_transport_deviation: f64,
    /// Trials whose random basis state was still ontological at the end.
    pub ontological_persisted: usize,
    pub failures: usize,
    pub verdict: Verdict,
}

struct TrialOutcome {
    deviation: f64,
    transport: f64,
    persisted: bool,
    pass: bool,
}

/// Each trial draws a random pure permutation, a random state and a random
/// basis state from its own substream, evolves both, and records the
/// deviations and whether the basis state stayed ontological.
pub fn run_trials(suite: &TrialSuite) -> Result<TrialSummary> {
    if suite.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if *suite.dims.start() == 0 || suite.dims.is_empty() {
        return Err(Error::Domain("trial dimension must be positive".into()));
    }
    let outcomes: Vec<TrialOutcome> = (0..suite.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialOutcome> {
            let mut rng = substream(suite.seed, trial as u64);
            let dim = rng.random_range(suite.dims.clone());
            let steps = rng.random_range(suite.steps.clone());
            let p = random_permutation(dim, &mut rng)?;
            let psi = random_state(dim, &mut rng)?;
            let basis = StateVector::basis(dim, rng.random_range(0..dim))?;
            let superposed = check_law(suite.fingerprint, &p, &psi, steps, suite.tol)?;
            let ontic = check_law(suite.fingerprint, &p, &basis, steps, suite.tol)?;
            Ok(TrialOutcome {
                deviation: superposed.max_multiset_deviation,
                transport: superposed.transport_deviation.unwrap_or(0.0),
                persisted: ontic.final_class.is_ontological(),
                pass: superposed.verdict.is_pass() && ontic.verdict.is_pass(),
            })
        })
        .collect::<Result<_>>()?;
    let failures = outcomes.iter().filter(|o| !o.pass).count();
    Ok(TrialSummary {
        trials: suite.trials,
        max_deviation: outcomes.iter().map(|o| o.deviation).fold(0.0, f64::max),
        max_transport_deviation: outcomes.iter().map(|o| o.transport).fold(0.0, f64::max),
        ontological_persisted: outcomes.iter().filter(|o| o.persisted).count(),
        failures,
        verdict: Verdict::from_bool(failures == 0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSummary {
    pub trials: usize,
    pub dim: usize,
    /// Trials whose deviation exceeded the detection threshold.
    pub detected: usize,
    pub min_deviation: f64,
    pub median_deviation: f64,
}

/// Random Haar unitaries applied to random basis states.
pub fn run_control_trials(dim: usize, trials: usize, seed: u64, threshold: f64) -> Result<ControlSummary> {
    if trials == 0 || dim == 0 {
        return Err(Error::Domain("control trials need positive dim and trial count".into()));
    }
    let mut deviations: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut rng = substream(seed, trial as u64);
            let u = random_unitary(dim, &mut rng)?;
            let e = StateVector::basis(dim, rng.random_range(0..dim))?;
            Ok(negative_control(&u, &e, threshold)?.max_multiset_deviation)
        })
        .collect::<Result<_>>()?;
    let detected = deviations.iter().filter(|&&d| d > threshold).count();
    deviations.sort_by(f64::total_cmp);
    Ok(ControlSummary {
        trials,
        dim,
        detected,
        min_deviation: deviations[0],
        median_deviation: deviations[trials / 2],
    })
}
