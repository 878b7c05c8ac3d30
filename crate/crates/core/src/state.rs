//! State vectors over the ontological basis.
//!
//! The basis elements `e_0, e_1, ...` are the ontological states. Any other
//! unit vector is a superposition, read as a probability distribution over
//! ontological states through the Born rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single superposition coefficient.
pub type Amplitude = Complex64;

/// Default tolerance for [`StateVector::classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Inputs whose squared norm is within this distance of one are rescaled on
/// construction; anything further away is rejected.
pub const RENORMALIZE_WINDOW: f64 = 1e-6;

/// Unit-norm amplitude vector in the ontological basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Amplitude>,
}

/// Whether a state is a single ontological basis state (up to a phase) or a
/// genuine superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateClass {
    Ontological { index: usize, phase: f64 },
    Superposed,
}

impl StateClass {
    pub fn is_ontological(&self) -> bool {
        matches!(self, StateClass::Ontological { .. })
    }
}

impl StateVector {
    /// Builds a state from raw amplitudes, rescaling round-off but rejecting
    /// vectors that are clearly not unit norm.
    pub fn new(amplitudes: Vec<Amplitude>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Domain("state dimension must be positive".into()));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain("amplitudes must be finite".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > RENORMALIZE_WINDOW {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm_sq > 0.0 && norm_sq.is_finite()) {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        Self::new(amplitudes.into_iter().map(|a| a * scale).collect())
    }

    /// The ontological basis state `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Domain(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); dim];
        amplitudes[index] = Amplitude::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Real amplitudes, e.g. `[0.6, 0.8]`.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Amplitude::new(v, 0.0)).collect())
    }

    /// Used by norm-preserving evolution, which only shuffles entries and
    /// multiplies them by unit phases.
    pub(crate) fn from_shuffled(amplitudes: Vec<Amplitude>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let w = Amplitude::from_polar(1.0, theta);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * w).collect(),
        }
    }

    /// Classifies the state as ontological or superposed.
    ///
    /// A state is ontological when one amplitude has modulus at least
    /// `1 - tol` and every other amplitude has modulus at most `tol`. The
    /// reported phase lies in `(-pi, pi]`.
    pub fn classify(&self, tol: f64) -> Result<StateClass> {
        if !(tol > 0.0 && tol < 0.5) {
            return Err(Error::Domain(format!(
                "classification tolerance must lie in (0, 0.5), got {tol}"
            )));
        }
        let norm_sq = self.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm_sq });
        }
        let Some((index, lead)) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        else {
            return Ok(StateClass::Superposed);
        };
        if lead.norm() < 1.0 - tol {
            return Ok(StateClass::Superposed);
        }
        let rest_small = self
            .amplitudes
            .iter()
            .enumerate()
            .all(|(i, a)| i == index || a.norm() <= tol);
        if !rest_small {
            return Ok(StateClass::Superposed);
        }
        Ok(StateClass::Ontological {
            index,
            phase: principal_phase(lead.arg()),
        })
    }

    /// Born probabilities `|a_i|^2`.
    pub fn born_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Moduli of the amplitudes in non-increasing order. This is the
    /// basis-label-free fingerprint that permutation dynamics conserves.
    pub fn amplitude_multiset(&self) -> Vec<f64> {
        let mut moduli: Vec<f64> = self.amplitudes.iter().map(|a| a.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        moduli
    }

    /// Born probabilities in non-increasing order.
    pub fn probability_multiset(&self) -> Vec<f64> {
        let mut probs = self.born_probabilities();
        probs.sort_by(|a, b| b.total_cmp(a));
        probs
    }
}

/// Maps an angle to `(-pi, pi]`.
pub fn principal_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // folds -0.0 into 0.0
    t + 0.0
}
