//! Bell/CHSH experiment under the mousedrop hidden-variable density
//! `W(a, b, c) = C |sin(4c - 2a - 2b)|` on `c in [0, pi)`.
//!
//! Both photons carry the same polarization `c`. Outcomes are deterministic:
//! a polarizer at angle `s` reports `sign(cos 2(s - c))`, with the boundary
//! `cos = 0` reported as `+1`. The density alone does not fix outcomes, so
//! this detection rule is a modelling choice.
//!
//! Correlations can be estimated by Monte Carlo (rejection sampling with a
//! flat proposal, acceptance rate `2/pi`) or by quadrature split at every
//! kink of the integrand. [`quantum_reference`] is the textbook
//! `cos 2(a - b)` for comparison output; nothing in this module asserts that
//! the model reproduces it.

mod quadrature;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use rand::{Rng, RngExt};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::substream;

pub use quadrature::{integrate, lattice_points, QuadEstimate};

/// Normalization of the density on `[0, pi)`.
pub const NORMALIZATION: f64 = 0.5;
pub const CLASSICAL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;
/// Smallest accepted quadrature panel count.
pub const MIN_PANELS: usize = 8;
/// Panels used by [`counterfactual_shift`] and the fitted normalization.
pub const REFERENCE_PANELS: usize = 4096;
/// Samples per Monte Carlo batch. Batch `k` of estimate lane `l` draws from
/// `substream(seed, (l << 32) | k)`.
pub const BATCH_SIZE: u64 = 1 << 16;

fn reduce(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    if r >= PI { 0.0 } else { r }
}

/// Alice's and Bob's polarizer orientations, reduced to `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizerSettings {
    a: f64,
    b: f64,
}

impl PolarizerSettings {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("polarizer angles must be finite, got ({a}, {b})")));
        }
        Ok(Self { a: reduce(a), b: reduce(b) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The combination `2a + 2b` reduced mod `pi`, the only way the density
    /// sees the settings.
    pub fn setting_sum(&self) -> f64 {
        reduce(2.0 * (self.a + self.b))
    }
}

/// The shared photon polarization angle, in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HiddenPolarization(f64);

impl HiddenPolarization {
    pub fn new(c: f64) -> Result<Self> {
        if (0.0..PI).contains(&c) {
            Ok(Self(c))
        } else {
            Err(Error::Domain(format!("hidden polarization must lie in [0, pi), got {c}")))
        }
    }

    pub fn angle(self) -> f64 {
        self.0
    }
}

/// `W(a, b, c) = C |sin(4c - 2a - 2b)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MousedropModel {
    pub normalization: f64,
}

impl Default for MousedropModel {
    fn default() -> Self {
        Self {
            normalization: NORMALIZATION,
        }
    }
}

impl MousedropModel {
    pub fn density(&self, a: f64, b: f64, c: f64) -> f64 {
        self.normalization * (4.0 * c - 2.0 * (a + b)).sin().abs()
    }

    /// Total mass `int_0^pi W(a, b, c) dc`.
    pub fn mass(&self, a: f64, b: f64, panels: usize) -> QuadEstimate {
        let phi = 2.0 * (a + b);
        let q = integrate(
            |c| (4.0 * c - phi).sin().abs(),
            0.0,
            PI,
            &density_kinks(phi),
            panels,
        );
        QuadEstimate {
            value: self.normalization * q.value,
            error: self.normalization * q.error,
        }
    }

    /// Normalization that makes the density integrate to one, found by
    /// quadrature rather than assumed.
    pub fn fitted_normalization(a: f64, b: f64) -> f64 {
        let unit = MousedropModel { normalization: 1.0 };
        1.0 / unit.mass(a, b, REFERENCE_PANELS).value
    }
}

/// `W(a, b, c)` with the standard normalization.
pub fn mousedrop_density(a: f64, b: f64, c: f64) -> f64 {
    MousedropModel::default().density(a, b, c)
}

fn density_kinks(phi: f64) -> Vec<f64> {
    lattice_points(phi / 4.0, FRAC_PI_4, 0.0, PI)
}

fn detector_kinks(setting: f64) -> Vec<f64> {
    lattice_points(setting + FRAC_PI_4, FRAC_PI_2, 0.0, PI)
}

/// Draws `c` with density `W(a, b, .)`: uniform proposals on `[0, pi)`,
/// accepted with probability `|sin(4c - 2a - 2b)|`.
pub fn sample_hidden<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> HiddenPolarization {
    sample_counted(2.0 * (a + b), rng).0
}

fn sample_counted<R: Rng + ?Sized>(phi: f64, rng: &mut R) -> (HiddenPolarization, u64) {
    let mut proposals = 0;
    loop {
        proposals += 1;
        let c = rng.random::<f64>() * PI;
        let u = rng.random::<f64>();
        if u < (4.0 * c - phi).sin().abs() && c < PI {
            return (HiddenPolarization(c), proposals);
        }
    }
}

/// Detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

/// `sign(cos 2(setting - c))`, with the boundary reported as `Plus`.
pub fn detect(setting: f64, c: HiddenPolarization) -> Outcome {
    if (2.0 * (setting - c.0)).cos() >= 0.0 {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

fn detect_value(setting: f64, c: f64) -> f64 {
    if (2.0 * (setting - c)).cos() >= 0.0 { 1.0 } else { -1.0 }
}

/// Standard quantum prediction `cos 2(a - b)` for polarization-entangled
/// photons. Comparison only.
pub fn quantum_reference(a: f64, b: f64) -> f64 {
    (2.0 * (a - b)).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    MonteCarlo { samples: u64 },
    Quadrature { panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    MonteCarlo,
    Quadrature,
}

impl Method {
    fn validate(self) -> Result<()> {
        match self {
            Method::MonteCarlo { samples: 0 } => {
                Err(Error::Domain("Monte Carlo sample count must be positive".into()))
            }
            Method::Quadrature { panels } if panels < MIN_PANELS => Err(Error::Domain(format!(
                "quadrature grid must have at least {MIN_PANELS} panels, got {panels}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    /// Standard error for Monte Carlo; refinement difference for quadrature.
    pub std_error: f64,
    /// Samples drawn, or panels used.
    pub n: u64,
    pub method: MethodKind,
    /// Accepted over proposed samples (Monte Carlo only).
    pub acceptance_rate: Option<f64>,
}

/// `E(a, b)` under the mousedrop density.
pub fn correlation(a: f64, b: f64, method: Method, seed: u64) -> Result<CorrelationEstimate> {
    correlation_lane(a, b, method, seed, 0)
}

fn correlation_lane(a: f64, b: f64, method: Method, seed: u64, lane: u64) -> Result<CorrelationEstimate> {
    method.validate()?;
    let s = PolarizerSettings::new(a, b)?;
    match method {
        Method::Quadrature { panels } => Ok(correlation_quadrature(s, panels)),
        Method::MonteCarlo { samples } => Ok(correlation_mc(s, samples, seed, lane)),
    }
}

fn correlation_quadrature(s: PolarizerSettings, panels: usize) -> CorrelationEstimate {
    let (a, b) = (s.a, s.b);
    let phi = 2.0 * (a + b);
    let mut kinks = density_kinks(phi);
    kinks.extend(detector_kinks(a));
    kinks.extend(detector_kinks(b));
    let q = integrate(
        |c| NORMALIZATION * (4.0 * c - phi).sin().abs() * detect_value(a, c) * detect_value(b, c),
        0.0,
        PI,
        &kinks,
        panels,
    );
    CorrelationEstimate {
        value: q.value,
        std_error: q.error,
        n: panels as u64,
        method: MethodKind::Quadrature,
        acceptance_rate: None,
    }
}

fn correlation_mc(s: PolarizerSettings, samples: u64, seed: u64, lane: u64) -> CorrelationEstimate {
    let (a, b) = (s.a, s.b);
    let phi = 2.0 * (a + b);
    let batches = samples.div_ceil(BATCH_SIZE);
    let partial: Vec<(i64, u64)> = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, (lane << 32) | k);
            let count = BATCH_SIZE.min(samples - k * BATCH_SIZE);
            let (mut sum, mut proposals) = (0i64, 0u64);
            for _ in 0..count {
                let (c, tries) = sample_counted(phi, &mut rng);
                proposals += tries;
                sum += i64::from(detect(a, c).value() * detect(b, c).value());
            }
            (sum, proposals)
        })
        .collect();
    let (sum, proposals) = partial
        .iter()
        .fold((0i64, 0u64), |(s, p), &(bs, bp)| (s + bs, p + bp));
    let n = samples as f64;
    let mean = sum as f64 / n;
    // outcomes are +-1, so the sample variance is (1 - mean^2) n / (n - 1)
    let var = if samples > 1 {
        (1.0 - mean * mean).max(0.0) * n / (n - 1.0)
    } else {
        1.0
    };
    CorrelationEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        n: samples,
        method: MethodKind::MonteCarlo,
        acceptance_rate: Some(samples as f64 / proposals as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    /// `a = 0, a' = pi/4, b = pi/8, b' = 3pi/8`.
    pub fn standard() -> Self {
        Self {
            a: 0.0,
            a_prime: FRAC_PI_4,
            b: PI / 8.0,
            b_prime: 3.0 * PI / 8.0,
        }
    }

    pub fn offset(self, delta: f64) -> Self {
        Self {
            a: self.a + delta,
            a_prime: self.a_prime + delta,
            b: self.b + delta,
            b_prime: self.b_prime + delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshResult {
    pub s: f64,
    /// Error of `S` assuming independent components.
    pub s_std_error: f64,
    pub ab: CorrelationEstimate,
    pub abp: CorrelationEstimate,
    pub apb: CorrelationEstimate,
    pub apbp: CorrelationEstimate,
    pub quantum_reference_s: f64,
    pub classical_bound: f64,
    pub tsirelson_bound: f64,
}

/// `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`. Monte Carlo components use
/// lanes 0..4 of the seed so they are independent of each other.
pub fn chsh(angles: ChshAngles, method: Method, seed: u64) -> Result<ChshResult> {
    let ChshAngles { a, a_prime, b, b_prime } = angles;
    let ab = correlation_lane(a, b, method, seed, 0)?;
    let abp = correlation_lane(a, b_prime, method, seed, 1)?;
    let apb = correlation_lane(a_prime, b, method, seed, 2)?;
    let apbp = correlation_lane(a_prime, b_prime, method, seed, 3)?;
    let s = ab.value - abp.value + apb.value + apbp.value;
    let s_std_error = [ab, abp, apb, apbp]
        .iter()
        .map(|e| e.std_error * e.std_error)
        .sum::<f64>()
        .sqrt();
    let quantum_reference_s = quantum_reference(a, b) - quantum_reference(a, b_prime)
        + quantum_reference(a_prime, b)
        + quantum_reference(a_prime, b_prime);
    Ok(ChshResult {
        s,
        s_std_error,
        ab,
        abp,
        apb,
        apbp,
        quantum_reference_s,
        classical_bound: CLASSICAL_BOUND,
        tsirelson_bound: TSIRELSON_BOUND,
    })
}

/// Total variation distance `1/2 int |W(a,b,c) - W(a',b',c)| dc`.
pub fn counterfactual_shift(a: f64, b: f64, a_prime: f64, b_prime: f64) -> f64 {
    let phi = PolarizerSettings::new(a, b).map(|s| s.setting_sum()).unwrap_or(f64::NAN);
    let psi = PolarizerSettings::new(a_prime, b_prime)
        .map(|s| s.setting_sum())
        .unwrap_or(f64::NAN);
    if phi == psi {
        return 0.0;
    }
    let mut kinks = density_kinks(phi);
    kinks.extend(density_kinks(psi));
    // crossings of the two densities
    kinks.extend(lattice_points((phi + psi) / 8.0, PI / 8.0, 0.0, PI));
    let q = integrate(
        |c| (NORMALIZATION * ((4.0 * c - phi).sin().abs() - (4.0 * c - psi).sin().abs())).abs(),
        0.0,
        PI,
        &kinks,
        REFERENCE_PANELS,
    );
    0.5 * q.value
}
