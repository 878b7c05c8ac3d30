use crate::error::{Error, Result};
use crate::evolution::permutation::GeneralizedPermutation;
use crate::linalg::{unitarity_deviation, CMatrix, ZERO};

/// Allowed `max |U^dagger U - I|` for accepted matrices.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A dense unitary evolution operator.
///
/// When the matrix is a generalized permutation (one unit-modulus entry per
/// column, exact zeros elsewhere) that structure is recorded so spectral
/// and Heisenberg computations can work on indices instead of dense
/// products.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
    structure: Option<GeneralizedPermutation>,
}

impl UnitaryMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Domain(format!(
                "evolution operator must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let structure = detect_permutation(&entries);
        let deviation = match structure {
            Some(_) => 0.0,
            None => unitarity_deviation(&entries),
        };
        if deviation.is_nan() || deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { entries, structure })
    }

    pub fn from_permutation(p: &GeneralizedPermutation) -> Self {
        Self {
            entries: p.to_matrix(),
            structure: Some(p.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// The generalized permutation this matrix represents, if any.
    pub fn as_permutation(&self) -> Option<&GeneralizedPermutation> {
        self.structure.as_ref()
    }

    /// `U^t` for any integer `t`.
    pub fn power(&self, t: i64) -> CMatrix {
        if let Some(p) = &self.structure {
            return p.power(t).to_matrix();
        }
        let base = if t < 0 {
            self.entries.adjoint()
        } else {
            self.entries.clone()
        };
        let n = self.dim();
        let mut remaining = t.unsigned_abs();
        let mut acc = CMatrix::identity(n, n);
        let mut square = base;
        while remaining > 0 {
            if remaining & 1 == 1 {
                acc = &acc * &square;
            }
            remaining >>= 1;
            if remaining > 0 {
                square = &square * &square;
            }
        }
        acc
    }
}

fn detect_permutation(m: &CMatrix) -> Option<GeneralizedPermutation> {
    let n = m.nrows();
    let mut target = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for j in 0..n {
        let mut hit = None;
        for i in 0..n {
            let z = m[(i, j)];
            if z != ZERO {
                if hit.is_some() || (z.norm() - 1.0).abs() > 1e-12 {
                    return None;
                }
                hit = Some((i, z.arg()));
            }
        }
        let (i, arg) = hit?;
        target.push(i);
        phase.push(arg);
    }
    GeneralizedPermutation::new(target, phase).ok()
}

/// Duration of one tick of the evolution clock, in abstract units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStep(f64);

impl TimeStep {
    pub fn new(dt: f64) -> Result<Self> {
        if dt > 0.0 && dt.is_finite() {
            Ok(Self(dt))
        } else {
            Err(Error::Domain(format!("time step must be positive and finite, got {dt}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for TimeStep {
    fn default() -> Self {
        Self(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::permutation::cogwheel;
    use num_complex::Complex64;

    #[test]
    fn detects_permutation_structure() {
        let p = cogwheel(4).unwrap();
        let u = UnitaryMatrix::new(p.to_matrix()).unwrap();
        assert_eq!(u.as_permutation(), Some(&p));
    }

    #[test]
    fn dense_rotation_has_no_structure() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
            ],
        );
        let u = UnitaryMatrix::new(m).unwrap();
        assert!(u.as_permutation().is_none());
        let inv = u.power(-1);
        assert!(crate::linalg::max_abs_diff(&(u.matrix() * inv), &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary { .. })));
        assert!(UnitaryMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn time_step_must_be_positive() {
        assert!(TimeStep::new(0.0).is_err());
        assert!(TimeStep::new(f64::NAN).is_err());
        assert_eq!(TimeStep::new(0.5).unwrap().get(), 0.5);
    }
}
