//! Heisenberg-picture operators, commutators, beable sets and the light-cone
//! test on a local automaton.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::UnitaryMatrix;
use crate::linalg::{commutator, hermiticity_deviation, max_abs, CMatrix, ONE, ZERO};

/// Tolerance on `max |A - A^dagger|` for accepted observables.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Horizon used when the period is unknown or larger than this.
pub const MAX_DEFAULT_HORIZON: u64 = 64;

/// A Hermitian operator on the universe's state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Domain("observable must be a nonempty square matrix".into()));
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    /// Identity on every site except a 2x2 Hermitian `block` acting on bit
    /// `site` (site 0 is the least significant bit of the configuration index).
    pub fn site_local(
        sites: usize,
        site: usize,
        block: [[Complex64; 2]; 2],
        label: impl Into<String>,
    ) -> Result<Self> {
        if site >= sites {
            return Err(Error::Domain(format!("site {site} out of range for {sites} sites")));
        }
        if sites > crate::evolution::MAX_SHIFT_SITES {
            return Err(Error::Resource(format!("{sites} sites is too many for dense operators")));
        }
        let dim = 1usize << sites;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let bit_in = (col >> site) & 1;
            for (bit_out, out_row) in block.iter().enumerate() {
                let v = out_row[bit_in];
                if v != ZERO {
                    let row = (col & !(1 << site)) | (bit_out << site);
                    m[(row, col)] = v;
                }
            }
        }
        Self::new(m, label)
    }

    /// Bit flip at `site`.
    pub fn pauli_x(sites: usize, site: usize) -> Result<Self> {
        Self::site_local(sites, site, [[ZERO, ONE], [ONE, ZERO]], format!("X@{site}"))
    }

    pub fn pauli_y(sites: usize, site: usize) -> Result<Self> {
        let i = Complex64::new(0.0, 1.0);
        Self::site_local(sites, site, [[ZERO, -i], [i, ZERO]], format!("Y@{site}"))
    }

    /// `+1` on bit value 0 and `-1` on bit value 1.
    pub fn pauli_z(sites: usize, site: usize) -> Result<Self> {
        Self::site_local(sites, site, [[ONE, ZERO], [ZERO, -ONE]], format!("Z@{site}"))
    }

    /// Projector onto bit value 1: the readout of one site.
    pub fn occupation(sites: usize, site: usize) -> Result<Self> {
        Self::site_local(sites, site, [[ZERO, ZERO], [ZERO, ONE]], format!("N@{site}"))
    }

    /// `|index><index|`.
    pub fn basis_projector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Domain(format!("index {index} out of range for dimension {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self::new(m, format!("P{index}"))
    }

    /// Parses a site probe such as `X@0`, `Z@3`, `Y@1` or `N@2`.
    pub fn parse_probe(text: &str, sites: usize) -> Result<Self> {
        let (kind, site) = text
            .split_once('@')
            .ok_or_else(|| Error::Domain(format!("probe {text:?} is not of the form K@site")))?;
        let site: usize = site
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("probe {text:?} has a bad site index")))?;
        match kind.trim() {
            "X" | "x" => Self::pauli_x(sites, site),
            "Y" | "y" => Self::pauli_y(sites, site),
            "Z" | "z" => Self::pauli_z(sites, site),
            "N" | "n" => Self::occupation(sites, site),
            other => Err(Error::Domain(format!("unknown probe kind {other:?}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Every basis projector: a complete set of diagonal observables.
pub fn diagonal_observables(dim: usize) -> Vec<Observable> {
    (0..dim)
        .map(|i| Observable::basis_projector(dim, i).expect("index in range"))
        .collect()
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `A(t) = U^{-t} A U^{t}`.
pub fn heisenberg(a: &Observable, u: &UnitaryMatrix, t: i64) -> Result<Observable> {
    check_dim(u.dim(), a.dim())?;
    let n = a.dim();
    let matrix = match u.as_permutation() {
        Some(p) => {
            // Q = U^t sends e_j to e^{i psi_j} e_{tau(j)}
            let q = p.power(t);
            let phase: Vec<Complex64> = q.phases().iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
            let pure = q.is_pure();
            CMatrix::from_fn(n, n, |i, j| {
                let z = a.matrix[(q.target(i), q.target(j))];
                if pure || z == ZERO {
                    z
                } else {
                    phase[i].conj() * z * phase[j]
                }
            })
        }
        None => {
            let w = u.power(t);
            w.adjoint() * &a.matrix * w
        }
    };
    Ok(Observable {
        matrix,
        label: format!("{}(t={t})", a.label),
    })
}

/// `max |AB - BA|`.
pub fn commutator_norm(a: &Observable, b: &Observable) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(max_abs(&commutator(&a.matrix, &b.matrix)))
}

/// `period(U)` when `U` is a pure permutation with period at most 64,
/// otherwise 64.
pub fn default_horizon(u: &UnitaryMatrix) -> u64 {
    u.as_permutation()
        .and_then(|p| p.period().ok())
        .filter(|&p| p <= MAX_DEFAULT_HORIZON as u128)
        .map(|p| p as u64)
        .unwrap_or(MAX_DEFAULT_HORIZON)
}

/// Outcome of a beable-set scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum BeableVerdict {
    Pass,
    /// First violation in scan order: pairs `(i, j)` with `i <= j`, then
    /// time `s` of operator `i`, then time `t` of operator `j`.
    Fail {
        first: usize,
        second: usize,
        s: u64,
        t: u64,
        commutator: f64,
    },
}

impl BeableVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, BeableVerdict::Pass)
    }
}

/// Checks that every pair of operators commutes at all pairs of times
/// `0 <= s, t <= horizon` within `tol`.
///
/// For generalized-permutation evolution the max-entry norm is invariant
/// under conjugation by `U`, so `|[A(s), B(t)]| = |[A, B(t - s)]|` and only
/// `2 horizon + 1` time differences need evaluating per pair.
pub fn is_beable_set(ops: &[Observable], u: &UnitaryMatrix, horizon: u64, tol: f64) -> Result<BeableVerdict> {
    for op in ops {
        check_dim(u.dim(), op.dim())?;
    }
    let h = i64::try_from(horizon).map_err(|_| Error::Domain("horizon too large".into()))?;
    let pairs: Vec<(usize, usize)> = (0..ops.len())
        .flat_map(|i| (i..ops.len()).map(move |j| (i, j)))
        .collect();

    let violations: Vec<Option<BeableVerdict>> = if u.as_permutation().is_some() {
        // shifted[j][d + h] = A_j(d) for d in -h..=h
        let shifted: Vec<Vec<Observable>> = ops
            .par_iter()
            .map(|op| (-h..=h).map(|d| heisenberg(op, u, d)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        pairs
            .par_iter()
            .map(|&(i, j)| -> Result<Option<BeableVerdict>> {
                let norms: Vec<f64> = (-h..=h)
                    .map(|d| commutator_norm(&ops[i], &shifted[j][(d + h) as usize]))
                    .collect::<Result<_>>()?;
                for s in 0..=h {
                    for t in 0..=h {
                        let c = norms[(t - s + h) as usize];
                        if c > tol {
                            return Ok(Some(BeableVerdict::Fail {
                                first: i,
                                second: j,
                                s: s as u64,
                                t: t as u64,
                                commutator: c,
                            }));
                        }
                    }
                }
                Ok(None)
            })
            .collect::<Result<_>>()?
    } else {
        let evolved: Vec<Vec<Observable>> = ops
            .par_iter()
            .map(|op| (0..=h).map(|s| heisenberg(op, u, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        pairs
            .par_iter()
            .map(|&(i, j)| -> Result<Option<BeableVerdict>> {
                for s in 0..=h as usize {
                    for t in 0..=h as usize {
                        let c = commutator_norm(&evolved[i][s], &evolved[j][t])?;
                        if c > tol {
                            return Ok(Some(BeableVerdict::Fail {
                                first: i,
                                second: j,
                                s: s as u64,
                                t: t as u64,
                                commutator: c,
                            }));
                        }
                    }
                }
                Ok(None)
            })
            .collect::<Result<_>>()?
    };
    Ok(violations.into_iter().flatten().next().unwrap_or(BeableVerdict::Pass))
}

/// A ring of sites with a finite signal speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SiteGeometry {
    pub sites: usize,
    /// Sites per step.
    pub speed: usize,
    /// Direction signals actually travel: `+1` or `-1` sites per step.
    pub drift: i64,
}

impl SiteGeometry {
    pub fn new(sites: usize, speed: usize, drift: i64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::Domain("a ring needs at least two sites".into()));
        }
        if speed == 0 || !(drift == 1 || drift == -1) {
            return Err(Error::Domain("speed must be positive and drift +1 or -1".into()));
        }
        Ok(Self { sites, speed, drift })
    }

    /// The geometry of [`crate::evolution::bit_shift_universe`]: bits move
    /// one site up per step.
    pub fn bit_shift(sites: usize) -> Result<Self> {
        Self::new(sites, 1, 1)
    }

    pub fn ring_distance(&self, x: usize, y: usize) -> usize {
        let d = x.abs_diff(y) % self.sites;
        d.min(self.sites - d)
    }

    pub fn classify(&self, x: usize, t: i64, y: usize, t_prime: i64) -> Separation {
        let d = self.ring_distance(x, y) as u64;
        let reach = t.abs_diff(t_prime) * self.speed as u64;
        match d.cmp(&reach) {
            std::cmp::Ordering::Greater => Separation::Spacelike,
            std::cmp::Ordering::Equal => Separation::Lightlike,
            std::cmp::Ordering::Less => Separation::Timelike,
        }
    }

    /// Whether `(y, t')` sits exactly on the path a signal from `(x, t)`
    /// follows (forwards or backwards in time).
    pub fn on_directed_cone(&self, x: usize, t: i64, y: usize, t_prime: i64) -> bool {
        let l = self.sites as i64;
        let travelled = self.drift * self.speed as i64 * (t_prime - t);
        (y as i64 - x as i64 - travelled).rem_euclid(l) == 0
            && self.classify(x, t, y, t_prime) == Separation::Lightlike
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Separation {
    Spacelike,
    Lightlike,
    Timelike,
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Separation::Spacelike => "spacelike",
            Separation::Lightlike => "lightlike",
            Separation::Timelike => "timelike",
        })
    }
}

/// An observable placed at a site and a time.
#[derive(Debug, Clone)]
pub struct Probe<'a> {
    pub observable: &'a Observable,
    pub site: usize,
    pub time: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeSample {
    pub separation: Separation,
    pub commutator: f64,
    /// Lightlike and along the automaton's propagation direction.
    pub on_directed_cone: bool,
}

/// Classifies the separation of two probes and evaluates
/// `|[A(t), B(t')]|` under `U`.
pub fn light_cone_check(geometry: &SiteGeometry, u: &UnitaryMatrix, a: &Probe, b: &Probe) -> Result<ConeSample> {
    for site in [a.site, b.site] {
        if site >= geometry.sites {
            return Err(Error::Domain(format!(
                "site {site} out of range for {} sites",
                geometry.sites
            )));
        }
    }
    let at = heisenberg(a.observable, u, a.time)?;
    let bt = heisenberg(b.observable, u, b.time)?;
    Ok(ConeSample {
        separation: geometry.classify(a.site, a.time, b.site, b.time),
        commutator: commutator_norm(&at, &bt)?,
        on_directed_cone: geometry.on_directed_cone(a.site, a.time, b.site, b.time),
    })
}

/// One row of a cone map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeRow {
    pub x: usize,
    pub x_prime: usize,
    pub t: i64,
    pub t_prime: i64,
    pub separation: Separation,
    pub commutator_norm: f64,
    pub probe_a: String,
    pub probe_b: String,
    pub on_directed_cone: bool,
}

/// All probe pairs `kind_a@x` at `t` against `kind_b@x'` at `t'` for every
/// site pair and `0 <= t, t' <= max_time`, evolving under the bit-shift ring.
pub fn cone_map(sites: usize, max_time: i64, kinds: &[(char, char)]) -> Result<Vec<ConeRow>> {
    let geometry = SiteGeometry::bit_shift(sites)?;
    let u = UnitaryMatrix::from_permutation(&crate::evolution::bit_shift_universe(sites)?);
    let probe = |kind: char, site: usize| Observable::parse_probe(&format!("{kind}@{site}"), sites);

    // evolved[kind][site][t]
    let mut letters: Vec<char> = kinds.iter().flat_map(|&(a, b)| [a, b]).collect();
    letters.sort_unstable();
    letters.dedup();
    let mut evolved = std::collections::BTreeMap::new();
    for &kind in &letters {
        let per_site: Vec<Vec<Observable>> = (0..sites)
            .map(|x| {
                let op = probe(kind, x)?;
                (0..=max_time).map(|t| heisenberg(&op, &u, t)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        evolved.insert(kind, per_site);
    }

    let mut cells = Vec::new();
    for &(ka, kb) in kinds {
        for x in 0..sites {
            for y in 0..sites {
                for t in 0..=max_time {
                    for tp in 0..=max_time {
                        cells.push((ka, kb, x, y, t, tp));
                    }
                }
            }
        }
    }
    cells
        .par_iter()
        .map(|&(ka, kb, x, y, t, tp)| {
            let a = &evolved[&ka][x][t as usize];
            let b = &evolved[&kb][y][tp as usize];
            Ok(ConeRow {
                x,
                x_prime: y,
                t,
                t_prime: tp,
                separation: geometry.classify(x, t, y, tp),
                commutator_norm: commutator_norm(a, b)?,
                probe_a: format!("{ka}@{x}"),
                probe_b: format!("{kb}@{y}"),
                on_directed_cone: geometry.on_directed_cone(x, t, y, tp),
            })
        })
        .collect()
}
