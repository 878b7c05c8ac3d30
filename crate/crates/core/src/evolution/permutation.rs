use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::StateVector;

/// Largest bit-shift ring; the universe has `2^L` configurations.
pub const MAX_SHIFT_SITES: usize = 12;

/// A deterministic one-step evolution law: basis state `i` goes to
/// `target[i]` and picks up the phase `e^{i phase[i]}`.
///
/// With all phases zero this is a plain permutation of ontological states.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPermutation {
    target: Vec<usize>,
    phase: Vec<f64>,
}

impl GeneralizedPermutation {
    pub fn new(target: Vec<usize>, phase: Vec<f64>) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::Domain("permutation dimension must be positive".into()));
        }
        if phase.len() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: target.len(),
                actual: phase.len(),
            });
        }
        if let Some(p) = phase.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("phase {p} is not finite")));
        }
        check_bijection(&target)?;
        Ok(Self { target, phase })
    }

    /// A pure permutation (all phases zero).
    pub fn pure(target: Vec<usize>) -> Result<Self> {
        let n = target.len();
        Self::new(target, vec![0.0; n])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::pure((0..dim).collect())
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn targets(&self) -> &[usize] {
        &self.target
    }

    pub fn phases(&self) -> &[f64] {
        &self.phase
    }

    pub fn target(&self, i: usize) -> usize {
        self.target[i]
    }

    pub fn is_pure(&self) -> bool {
        self.phase.iter().all(|&p| p == 0.0)
    }

    /// The inverse law: `target[i] = j` becomes `j -> i` with the opposite phase.
    pub fn inverse(&self) -> Self {
        let mut target = vec![0; self.dim()];
        let mut phase = vec![0.0; self.dim()];
        for (i, (&t, &p)) in self.target.iter().zip(&self.phase).enumerate() {
            target[t] = i;
            phase[t] = -p;
        }
        Self { target, phase }
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let target = self.target.iter().map(|&t| other.target[t]).collect();
        let phase = self
            .target
            .iter()
            .zip(&self.phase)
            .map(|(&t, &p)| p + other.phase[t])
            .collect();
        Ok(Self { target, phase })
    }

    /// `self` applied `exponent` times; negative exponents use the inverse.
    pub fn power(&self, exponent: i64) -> Self {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut remaining = exponent.unsigned_abs();
        let mut acc = Self {
            target: (0..self.dim()).collect(),
            phase: vec![0.0; self.dim()],
        };
        let mut square = base;
        while remaining > 0 {
            if remaining & 1 == 1 {
                acc = acc.then(&square).expect("same dimension");
            }
            remaining >>= 1;
            if remaining > 0 {
                square = square.then(&square).expect("same dimension");
            }
        }
        acc
    }

    /// Disjoint cycles, each starting from its smallest index, ordered by
    /// that index.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.dim()];
        let mut out = Vec::new();
        for start in 0..self.dim() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.target[i];
            }
            out.push(cycle);
        }
        out
    }

    /// Least `k >= 1` with `P^k = 1`: the lcm of the cycle lengths.
    ///
    /// Refuses phased laws, whose powers need not ever return to the
    /// identity.
    pub fn period(&self) -> Result<u128> {
        if !self.is_pure() {
            return Err(Error::Unsupported(
                "period is only defined for pure permutations".into(),
            ));
        }
        self.cycles().iter().try_fold(1u128, |acc, c| {
            let len = c.len() as u128;
            let g = gcd(acc, len);
            (acc / g)
                .checked_mul(len)
                .ok_or_else(|| Error::Resource("period exceeds 2^128".into()))
        })
    }

    /// Dense matrix with entry `(target[i], i) = e^{i phase[i]}`.
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (i, (&t, &p)) in self.target.iter().zip(&self.phase).enumerate() {
            m[(t, i)] = Complex64::from_polar(1.0, p);
        }
        m
    }

    /// Applies the law `steps` times by moving amplitudes between indices.
    pub fn evolve(&self, state: &StateVector, steps: u64) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            });
        }
        let pure = self.is_pure();
        let mut current = state.amplitudes().to_vec();
        let mut next = vec![Complex64::new(0.0, 0.0); self.dim()];
        for _ in 0..steps {
            for (i, a) in current.iter().enumerate() {
                next[self.target[i]] = if pure {
                    *a
                } else {
                    a * Complex64::from_polar(1.0, self.phase[i])
                };
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(StateVector::from_shuffled(current))
    }

    /// Where basis state `index` ends up after `steps` applications.
    pub fn orbit_position(&self, index: usize, steps: u64) -> usize {
        let cycle_len = {
            let mut len = 1u64;
            let mut i = self.target[index];
            while i != index {
                i = self.target[i];
                len += 1;
            }
            len
        };
        let mut i = index;
        for _ in 0..steps % cycle_len {
            i = self.target[i];
        }
        i
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_bijection(table: &[usize]) -> Result<()> {
    let n = table.len();
    let mut preimage: Vec<Option<usize>> = vec![None; n];
    for (i, &t) in table.iter().enumerate() {
        if t >= n {
            return Err(Error::Domain(format!(
                "target {t} of state {i} is out of range for dimension {n}"
            )));
        }
        if let Some(first) = preimage[t] {
            return Err(Error::NotInvertible {
                first,
                second: i,
                target: t,
            });
        }
        preimage[t] = Some(i);
    }
    Ok(())
}

/// The single-cycle law `|i> -> |i+1 mod N>`.
pub fn cogwheel(n: usize) -> Result<GeneralizedPermutation> {
    if n == 0 {
        return Err(Error::Domain("cogwheel needs at least one state".into()));
    }
    GeneralizedPermutation::pure((0..n).map(|i| (i + 1) % n).collect())
}

/// Builds a pure law from an update table, failing with
/// [`Error::NotInvertible`] when two states share a successor.
pub fn from_update_rule(table: &[usize]) -> Result<GeneralizedPermutation> {
    GeneralizedPermutation::pure(table.to_vec())
}

/// Cyclic rotation of an `L`-site ring of bits.
///
/// Configuration index `s` holds site `x` in bit `x` (site 0 is the least
/// significant bit). One step moves the bit at site `x` to site `x + 1 mod L`.
pub fn bit_shift_universe(sites: usize) -> Result<GeneralizedPermutation> {
    if sites == 0 {
        return Err(Error::Domain("bit-shift universe needs at least one site".into()));
    }
    if sites > MAX_SHIFT_SITES {
        return Err(Error::Resource(format!(
            "{sites} sites would need 2^{sites} states; the limit is {MAX_SHIFT_SITES} sites"
        )));
    }
    let dim = 1usize << sites;
    let mask = dim - 1;
    let target = (0..dim)
        .map(|s| ((s << 1) | (s >> (sites - 1))) & mask)
        .collect();
    GeneralizedPermutation::pure(target)
}

/// On-disk universe description: `{ "dim": n, "target": [...], "phase": [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseDescription {
    pub dim: usize,
    pub target: Vec<usize>,
    #[serde(default)]
    pub phase: Option<Vec<f64>>,
}

impl UniverseDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Domain(format!("invalid universe description: {e}")))
    }

    pub fn into_permutation(self) -> Result<GeneralizedPermutation> {
        if self.target.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: self.target.len(),
            });
        }
        let phase = self.phase.unwrap_or_else(|| vec![0.0; self.dim]);
        GeneralizedPermutation::new(self.target, phase)
    }
}

impl From<&GeneralizedPermutation> for UniverseDescription {
    fn from(p: &GeneralizedPermutation) -> Self {
        Self {
            dim: p.dim(),
            target: p.targets().to_vec(),
            phase: Some(p.phases().to_vec()),
        }
    }
}
