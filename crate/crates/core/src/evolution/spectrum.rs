//! Eigen-decomposition of evolution operators and the emergent Hamiltonian.
//!
//! Writing `U = V diag(e^{-i phi_k}) V^dagger`, the Hamiltonian is
//! `H = V diag(phi_k / dt) V^dagger`, so that `U = exp(-i H dt)`. The phases
//! are only fixed modulo `2 pi`; [`Branch`] picks the window.
//!
//! Two routes produce the decomposition:
//!
//! * Generalized permutations are block diagonal over their cycles. A cycle
//!   of length `m` with accumulated phase `Theta` is gauge-equivalent to
//!   `e^{i Theta/m}` times a cyclic shift, which the discrete Fourier basis
//!   diagonalizes exactly. No iterative solver is involved, so cogwheels
//!   with thousands of states are cheap.
//! * Anything else goes through a dense solver: a unitary is normal, so a
//!   generic real combination of its Hermitian and anti-Hermitian parts has
//!   the same eigenvectors. Clusters that this combination fails to split are
//!   re-solved inside their subspace with a different combination.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::permutation::GeneralizedPermutation;
use crate::evolution::unitary::{TimeStep, UnitaryMatrix};
use crate::linalg::{hermiticity_deviation, CMatrix};

/// Eigenphases closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-8;

const SPLIT_GAP: f64 = 1e-6;
const MAX_SPLIT_ATTEMPTS: usize = 6;
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Window for eigenphases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Branch {
    /// `[0, 2 pi)`
    #[default]
    #[serde(rename = "zero2pi")]
    ZeroToTwoPi,
    /// `(-pi, pi]`
    #[serde(rename = "minuspi2pi")]
    MinusPiToPi,
}

impl Branch {
    pub fn place(self, phi: f64) -> f64 {
        let mut t = phi.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        let t = t + 0.0;
        match self {
            Branch::ZeroToTwoPi => t,
            Branch::MinusPiToPi if t > PI => t - TAU,
            Branch::MinusPiToPi => t,
        }
    }

    pub fn contains(self, phi: f64) -> bool {
        match self {
            Branch::ZeroToTwoPi => (0.0..TAU).contains(&phi),
            Branch::MinusPiToPi => phi > -PI && phi <= PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::ZeroToTwoPi => "zero2pi",
            Branch::MinusPiToPi => "minuspi2pi",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero2pi" => Ok(Branch::ZeroToTwoPi),
            "minuspi2pi" => Ok(Branch::MinusPiToPi),
            other => Err(Error::Domain(format!(
                "unknown branch {other:?}; expected zero2pi or minuspi2pi"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CycleBlock {
    sites: Vec<usize>,
    /// `e^{i gamma_j}` relating `e_{sites[j]}` to the uniform-phase frame.
    gauge: Vec<Complex64>,
    /// First eigenpair index belonging to this block.
    offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Eigenbasis {
    Dense(CMatrix),
    Cycles(Vec<CycleBlock>),
}

/// Eigenphases `phi_k` and eigenvectors `v_k` with `U v_k = e^{-i phi_k} v_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    dim: usize,
    branch: Branch,
    phases: Vec<f64>,
    basis: Eigenbasis,
}

impl Spectrum {
    /// Exact decomposition of a generalized permutation through its cycles.
    pub fn of_permutation(p: &GeneralizedPermutation, branch: Branch) -> Self {
        let mut phases = Vec::with_capacity(p.dim());
        let mut blocks = Vec::new();
        for sites in p.cycles() {
            let m = sites.len();
            let total: f64 = sites.iter().map(|&i| p.phases()[i]).sum();
            let mean = total / m as f64;
            let mut gauge = Vec::with_capacity(m);
            let mut gamma = 0.0;
            for &site in &sites {
                gauge.push(Complex64::from_polar(1.0, gamma));
                gamma += p.phases()[site] - mean;
            }
            let offset = phases.len();
            // U w_k = e^{i (Theta + 2 pi k) / m} w_k
            for k in 0..m {
                let phi = -(total + TAU * k as f64) / m as f64;
                phases.push(branch.place(phi));
            }
            blocks.push(CycleBlock {
                sites,
                gauge,
                offset,
            });
        }
        Self {
            dim: p.dim(),
            branch,
            phases,
            basis: Eigenbasis::Cycles(blocks),
        }
    }

    /// Numerical decomposition that ignores any permutation structure.
    pub fn dense(u: &CMatrix, branch: Branch) -> Result<Self> {
        let n = u.nrows();
        let mut pairs = Vec::with_capacity(n);
        split_subspace(u, CMatrix::identity(n, n), 0, &mut pairs)?;
        let mut vectors = CMatrix::zeros(n, n);
        let mut phases = Vec::with_capacity(n);
        for (k, (lambda, v)) in pairs.into_iter().enumerate() {
            vectors.set_column(k, &v);
            phases.push(branch.place(-lambda.arg()));
        }
        Ok(Self {
            dim: n,
            branch,
            phases,
            basis: Eigenbasis::Dense(vectors),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Eigenphases in eigenvector (column) order.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn sorted_phases(&self) -> Vec<f64> {
        let mut p = self.phases.clone();
        p.sort_by(f64::total_cmp);
        p
    }

    /// Eigenvectors as the columns of a unitary matrix.
    pub fn eigenvectors(&self) -> CMatrix {
        match &self.basis {
            Eigenbasis::Dense(v) => v.clone(),
            Eigenbasis::Cycles(blocks) => {
                let mut v = CMatrix::zeros(self.dim, self.dim);
                for block in blocks {
                    let m = block.sites.len();
                    let roots = roots_of_unity(m);
                    let norm = (m as f64).sqrt().recip();
                    for k in 0..m {
                        for (j, (&site, &g)) in block.sites.iter().zip(&block.gauge).enumerate() {
                            v[(site, block.offset + k)] = g * roots[(j * k) % m] * norm;
                        }
                    }
                }
                v
            }
        }
    }

    /// `V diag(f(phi_k)) V^dagger`.
    pub fn apply_function<F>(&self, f: F) -> CMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        match &self.basis {
            Eigenbasis::Dense(v) => {
                let weights: Vec<Complex64> = self.phases.iter().map(|&p| f(p)).collect();
                let mut scaled = v.clone();
                for (k, w) in weights.iter().enumerate() {
                    for z in scaled.column_mut(k).iter_mut() {
                        *z *= w;
                    }
                }
                scaled * v.adjoint()
            }
            Eigenbasis::Cycles(blocks) => {
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for block in blocks {
                    let m = block.sites.len();
                    let roots = roots_of_unity(m);
                    let weights: Vec<Complex64> = self.phases[block.offset..block.offset + m]
                        .iter()
                        .map(|&p| f(p))
                        .collect();
                    // the block is a circulant in the uniform-phase frame
                    let inv_m = 1.0 / m as f64;
                    let kernel: Vec<Complex64> = (0..m)
                        .map(|d| {
                            weights
                                .iter()
                                .enumerate()
                                .map(|(k, w)| w * roots[(d * k) % m])
                                .sum::<Complex64>()
                                * inv_m
                        })
                        .collect();
                    for (l, (&site_l, g_l)) in block.sites.iter().zip(&block.gauge).enumerate() {
                        let g_l = g_l.conj();
                        for (j, (&site_j, g_j)) in block.sites.iter().zip(&block.gauge).enumerate() {
                            out[(site_j, site_l)] = g_j * kernel[(j + m - l) % m] * g_l;
                        }
                    }
                }
                out
            }
        }
    }

    /// `V diag(e^{-i phi_k}) V^dagger`, which should reproduce `U`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|phi| Complex64::from_polar(1.0, -phi))
    }

    /// The Hermitian generator `H` with `exp(-i H dt) = U`.
    pub fn hamiltonian(&self, dt: TimeStep) -> Hamiltonian {
        let inv_dt = 1.0 / dt.get();
        let mut matrix = self.apply_function(|phi| Complex64::new(phi * inv_dt, 0.0));
        hermitize(&mut matrix);
        Hamiltonian {
            matrix,
            energies: self.phases.iter().map(|p| p * inv_dt).collect(),
            dt,
        }
    }
}

/// `H` together with the energies it was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub matrix: CMatrix,
    /// Eigenvalues of `H`, i.e. eigenphases divided by `dt`.
    pub energies: Vec<f64>,
    pub dt: TimeStep,
}

impl Hamiltonian {
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// `exp(-i H dt)` by scaling and squaring, independent of the
    /// eigenvectors that produced `H`.
    pub fn evolution_operator(&self) -> CMatrix {
        let gen = &self.matrix * Complex64::new(0.0, -self.dt.get());
        crate::linalg::expm(&gen)
    }
}

/// Spectrum of `U`, using the exact cycle route when `U` is a generalized
/// permutation.
pub fn spectrum(u: &UnitaryMatrix, branch: Branch) -> Result<Spectrum> {
    match u.as_permutation() {
        Some(p) => Ok(Spectrum::of_permutation(p, branch)),
        None => Spectrum::dense(u.matrix(), branch),
    }
}

/// The emergent Hamiltonian of `U` for clock tick `dt`.
pub fn extract_hamiltonian(u: &UnitaryMatrix, dt: TimeStep, branch: Branch) -> Result<Hamiltonian> {
    let h = spectrum(u, branch)?.hamiltonian(dt);
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(h)
}

/// `e^{-2 pi i r / m}` for `r = 0..m`.
fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|r| Complex64::from_polar(1.0, -TAU * r as f64 / m as f64))
        .collect()
}

fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Diagonalizes `U` restricted to the span of the orthonormal columns of
/// `basis`, appending `(eigenvalue, eigenvector)` pairs.
fn split_subspace(
    u: &CMatrix,
    basis: CMatrix,
    attempt: usize,
    out: &mut Vec<(Complex64, nalgebra::DVector<Complex64>)>,
) -> Result<()> {
    let k = basis.ncols();
    let compressed = basis.adjoint() * u * &basis;
    if k == 1 {
        let lambda = compressed[(0, 0)];
        out.push((lambda / lambda.norm(), basis.column(0).into_owned()));
        return Ok(());
    }
    // shift and rescale so that clusters nested inside clusters still spread
    // over an O(1) range
    let mean: Complex64 = (0..k).map(|i| compressed[(i, i)]).sum::<Complex64>() / k as f64;
    let shifted = &compressed - CMatrix::identity(k, k) * mean;
    let spread = crate::linalg::max_abs(&shifted);
    if spread < DEGENERACY_GAP {
        out.extend(degenerate_block(u, basis));
        return Ok(());
    }
    if attempt >= MAX_SPLIT_ATTEMPTS {
        return Err(Error::Eigensolver(format!(
            "could not separate a cluster of {k} eigenvalues"
        )));
    }

    let theta = 0.613 + GOLDEN_ANGLE * attempt as f64;
    let (c, s) = (theta.cos() / spread, theta.sin() / spread);
    let adj = shifted.adjoint();
    // c * (D + D^dagger)/2 + s * (D - D^dagger)/(2i)
    let pencil = (&shifted + &adj) * Complex64::new(0.5 * c, 0.0)
        + (&shifted - &adj) * Complex64::new(0.0, -0.5 * s);
    let eig = SymmetricEigen::try_new(pencil, 1e-15, 0)
        .ok_or_else(|| Error::Eigensolver("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < SPLIT_GAP {
            end += 1;
        }
        let cols: Vec<_> = order[start..end]
            .iter()
            .map(|&idx| eig.eigenvectors.column(idx).into_owned())
            .collect();
        let local = DMatrix::from_columns(&cols);
        let sub = &basis * local;
        if end - start == k {
            // the pencil did not split anything; try another direction
            split_subspace(u, sub, attempt + 1, out)?;
        } else {
            split_subspace(u, sub, 0, out)?;
        }
        start = end;
    }
    Ok(())
}

/// Re-orthonormalizes a degenerate cluster and returns Rayleigh quotients.
fn degenerate_block(
    u: &CMatrix,
    basis: CMatrix,
) -> Vec<(Complex64, nalgebra::DVector<Complex64>)> {
    let q = basis.qr().q();
    (0..q.ncols())
        .map(|j| {
            let v = q.column(j).into_owned();
            let lambda = (v.adjoint() * u * &v)[(0, 0)];
            (lambda / lambda.norm(), v)
        })
        .collect()
}
