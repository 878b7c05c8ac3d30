//! Dense complex matrix helpers shared by the evolution and operator modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix, column-major.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |a - b|` entry-wise.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |U^dagger U - I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let expect = if i == j { ONE } else { ZERO };
            dev = dev.max((g[(i, j)] - expect).norm());
        }
    }
    dev
}

/// `max |A - A^dagger|`.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Product that skips exact zeros of the left factor. Permutation-like and
/// site-local operators have one nonzero per row, which makes this O(n^2).
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimension mismatch");
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMatrix::zeros(n, m);
    for p in 0..k {
        for i in 0..n {
            let x = a[(i, p)];
            if x == ZERO {
                continue;
            }
            for j in 0..m {
                let y = b[(p, j)];
                if y != ZERO {
                    out[(i, j)] += x * y;
                }
            }
        }
    }
    out
}

/// Number of entries that are not exactly zero.
pub fn nnz(m: &CMatrix) -> usize {
    m.iter().filter(|z| **z != ZERO).count()
}

/// `AB - BA`, using the sparse product when either side is sparse.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let sparse = nnz(a) <= 4 * n || nnz(b) <= 4 * n;
    if sparse {
        matmul(a, b) - matmul(b, a)
    } else {
        a * b - b * a
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series. Accurate to a few ulps times `2^s` for the norms used here
/// (`|A| <= 2 pi n`).
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    // max row sum bounds the spectral radius
    let norm = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a * Complex64::new(scale, 0.0);
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.0, 1.3),
            c(-0.5, 0.0),
            c(0.2, -4.0),
        ]));
        let e = expm(&d);
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_of_generator_gives_rotation() {
        // exp(-i theta Y) = [[cos, -sin], [sin, cos]]
        let theta = 0.7;
        let gen = CMatrix::from_row_slice(2, 2, &[ZERO, c(-theta, 0.0), c(theta, 0.0), ZERO]);
        let r = expm(&gen);
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(theta.cos(), 0.0),
                c(-theta.sin(), 0.0),
                c(theta.sin(), 0.0),
                c(theta.cos(), 0.0),
            ],
        );
        assert!(max_abs_diff(&r, &expect) < 1e-14);
    }

    #[test]
    fn sparse_product_agrees_with_dense() {
        let a = CMatrix::from_fn(5, 5, |i, j| if (i + 2) % 5 == j { c(1.0, 0.5) } else { ZERO });
        let b = CMatrix::from_fn(5, 5, |i, j| c(i as f64 - j as f64, (i * j) as f64));
        assert!(max_abs_diff(&matmul(&a, &b), &(&a * &b)) == 0.0);
        assert!(max_abs_diff(&matmul(&b, &a), &(&b * &a)) < 1e-12);
    }

    #[test]
    fn pauli_commutator() {
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert_eq!(max_abs(&commutator(&x, &z)), 2.0);
        assert_eq!(max_abs(&commutator(&x, &x)), 0.0);
    }
}
