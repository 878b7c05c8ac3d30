//! Seeded random universes, states and unitaries.
//!
//! Every batched computation derives its generators from one master seed
//! with [`substream`]: stream `k` is ChaCha8 seeded from the master seed
//! with its stream id set to `k`. Results therefore depend only on the seed
//! and the batch index, never on how batches are scheduled across threads.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::evolution::{GeneralizedPermutation, UnitaryMatrix};
use crate::linalg::CMatrix;
use crate::state::StateVector;

/// Generator for batch (or trial) `index` under `master`.
pub fn substream(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Uniformly random pure permutation.
pub fn random_permutation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<GeneralizedPermutation> {
    let mut target: Vec<usize> = (0..dim).collect();
    target.shuffle(rng);
    GeneralizedPermutation::pure(target)
}

/// Random permutation with independent uniform phases in `[0, 2 pi)`.
pub fn random_generalized_permutation<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<GeneralizedPermutation> {
    let mut target: Vec<usize> = (0..dim).collect();
    target.shuffle(rng);
    let phase = (0..dim).map(|_| rng.random::<f64>() * TAU).collect();
    GeneralizedPermutation::new(target, phase)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random state: a normalized complex Gaussian vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    StateVector::normalized((0..dim).map(|_| gaussian(rng)).collect())
}

/// Haar-random unitary from the QR factorization of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    let z = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    UnitaryMatrix::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_deviation;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| substream(7, 0).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = substream(7, 0).random();
        let y: u64 = substream(7, 1).random();
        let z: u64 = substream(8, 0).random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = substream(1, 0);
        let p = random_generalized_permutation(16, &mut rng).unwrap();
        assert_eq!(p.dim(), 16);
        let s = random_state(16, &mut rng).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let u = random_unitary(16, &mut rng).unwrap();
        assert!(unitarity_deviation(u.matrix()) < 1e-12);
        assert!(u.as_permutation().is_none());
    }
}
