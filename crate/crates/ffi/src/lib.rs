//! C ABI over the `ontic` library.
//!
//! Every fallible function returns an [`OnticStatus`]; on anything other
//! than `ONTIC_STATUS_OK` a message is stored per thread and can be copied
//! out with [`ontic_last_error_message`]. Complex vectors cross the boundary
//! as interleaved `(re, im)` doubles, the layout of C99 `double complex`.
//! Permutations are opaque [`OnticPermutation`] handles released with
//! [`ontic_permutation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ontic::bell::{self, ChshAngles, Method};
use ontic::evolution::{
    bit_shift_universe, cogwheel, extract_hamiltonian, spectrum, Branch, GeneralizedPermutation, TimeStep,
    UnitaryMatrix,
};
use ontic::state::{StateClass, StateVector};
use ontic::Error;

use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnticStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotInvertible = 4,
    NotNormalized = 5,
    ResourceLimit = 6,
    Unsupported = 7,
    Numerical = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnticBranch {
    /// `[0, 2 pi)`
    ZeroToTwoPi = 0,
    /// `(-pi, pi]`
    MinusPiToPi = 1,
}

impl From<OnticBranch> for Branch {
    fn from(b: OnticBranch) -> Self {
        match b {
            OnticBranch::ZeroToTwoPi => Branch::ZeroToTwoPi,
            OnticBranch::MinusPiToPi => Branch::MinusPiToPi,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnticMethod {
    MonteCarlo = 0,
    Quadrature = 1,
}

/// One correlation estimate. `n` is the sample count or panel count.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OnticEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OnticChsh {
    pub s: f64,
    pub s_std_error: f64,
    pub ab: OnticEstimate,
    pub abp: OnticEstimate,
    pub apb: OnticEstimate,
    pub apbp: OnticEstimate,
    pub quantum_reference_s: f64,
    pub classical_bound: f64,
    pub tsirelson_bound: f64,
}

/// Opaque generalized permutation.
pub struct OnticPermutation {
    inner: GeneralizedPermutation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OnticStatus {
    match e {
        Error::NotNormalized { .. } => OnticStatus::NotNormalized,
        Error::DimensionMismatch { .. } => OnticStatus::DimensionMismatch,
        Error::Domain(_) => OnticStatus::InvalidArgument,
        Error::NotInvertible { .. } => OnticStatus::NotInvertible,
        Error::Resource(_) => OnticStatus::ResourceLimit,
        Error::Unsupported(_) => OnticStatus::Unsupported,
        Error::NotUnitary { .. } | Error::NotHermitian { .. } | Error::Eigensolver(_) => OnticStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> OnticStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OnticStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("{name} must not be null"));
            OnticStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            OnticStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &'static str) -> Result<*const T, Failure> {
    if p.is_null() {
        Err(Failure::Null(name))
    } else {
        Ok(p)
    }
}

unsafe fn read_complex(data: *const f64, dim: usize) -> Result<Vec<Complex64>, Failure> {
    let data = non_null(data, "amplitudes")?;
    let raw = std::slice::from_raw_parts(data, 2 * dim);
    Ok(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn write_complex(out: *mut f64, values: &[Complex64]) -> Result<(), Failure> {
    let out = non_null(out, "out")? as *mut f64;
    let dst = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (pair, z) in dst.chunks_exact_mut(2).zip(values) {
        pair[0] = z.re;
        pair[1] = z.im;
    }
    Ok(())
}

unsafe fn emit_handle(out: *mut *mut OnticPermutation, p: GeneralizedPermutation) -> Result<(), Failure> {
    let out = non_null(out, "out")? as *mut *mut OnticPermutation;
    *out = Box::into_raw(Box::new(OnticPermutation { inner: p }));
    Ok(())
}

unsafe fn handle<'a>(p: *const OnticPermutation) -> Result<&'a GeneralizedPermutation, Failure> {
    Ok(&(*non_null(p, "permutation")?).inner)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ontic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the full message length without the NUL.
/// Returns 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ontic_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// The `n`-state cogwheel `k -> k + 1 mod n`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_cogwheel(n: usize, out: *mut *mut OnticPermutation) -> OnticStatus {
    guard(|| emit_handle(out, cogwheel(n)?))
}

/// Cyclic shift on `sites` bits, site 0 being the least significant.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_bit_shift(sites: usize, out: *mut *mut OnticPermutation) -> OnticStatus {
    guard(|| emit_handle(out, bit_shift_universe(sites)?))
}

/// Permutation `e_i -> e^{i phase[i]} e_{target[i]}`. `phase` may be null
/// for a pure permutation.
///
/// # Safety
/// `target` must be valid for `dim` reads, `phase` null or valid for `dim`
/// reads, `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_from_table(
    target: *const usize,
    phase: *const f64,
    dim: usize,
    out: *mut *mut OnticPermutation,
) -> OnticStatus {
    guard(|| {
        let target = std::slice::from_raw_parts(non_null(target, "target")?, dim).to_vec();
        let phase = if phase.is_null() {
            vec![0.0; dim]
        } else {
            std::slice::from_raw_parts(phase, dim).to_vec()
        };
        emit_handle(out, GeneralizedPermutation::new(target, phase)?)
    })
}

/// # Safety
/// `p` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_free(p: *mut OnticPermutation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension of the state space, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_dim(p: *const OnticPermutation) -> usize {
    if p.is_null() {
        0
    } else {
        (*p).inner.dim()
    }
}

/// Period of a pure permutation.
///
/// # Safety
/// `p` must be a live handle, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_period(p: *const OnticPermutation, out: *mut u64) -> OnticStatus {
    guard(|| {
        let period = handle(p)?.period()?;
        let period = u64::try_from(period)
            .map_err(|_| Error::Resource(format!("period {period} does not fit in 64 bits")))?;
        *(non_null(out, "out")? as *mut u64) = period;
        Ok(())
    })
}

/// Evolves the state `amplitudes` (interleaved, `dim` complex entries) by
/// `steps` applications of `p` and writes the result to `out`.
///
/// # Safety
/// `amplitudes` and `out` must each be valid for `2 * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_evolve(
    p: *const OnticPermutation,
    amplitudes: *const f64,
    dim: usize,
    steps: u64,
    out: *mut f64,
) -> OnticStatus {
    guard(|| {
        let p = handle(p)?;
        let psi = StateVector::new(read_complex(amplitudes, dim)?)?;
        let fin = p.evolve(&psi, steps)?;
        write_complex(out, fin.amplitudes())
    })
}

/// Sorted eigenphases `phi` with `U v = e^{-i phi} v`, placed in `branch`.
///
/// # Safety
/// `out` must be valid for `dim(p)` doubles.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_eigenphases(
    p: *const OnticPermutation,
    branch: OnticBranch,
    out: *mut f64,
) -> OnticStatus {
    guard(|| {
        let p = handle(p)?;
        let u = UnitaryMatrix::from_permutation(p);
        let phases = spectrum(&u, branch.into())?.sorted_phases();
        let out = non_null(out, "out")? as *mut f64;
        ptr::copy_nonoverlapping(phases.as_ptr(), out, phases.len());
        Ok(())
    })
}

/// Hamiltonian `H` with `exp(-i H dt) = U`, written row-major as `dim * dim`
/// interleaved complex entries.
///
/// # Safety
/// `out` must be valid for `2 * dim(p) * dim(p)` doubles.
#[no_mangle]
pub unsafe extern "C" fn ontic_permutation_hamiltonian(
    p: *const OnticPermutation,
    dt: f64,
    branch: OnticBranch,
    out: *mut f64,
) -> OnticStatus {
    guard(|| {
        let p = handle(p)?;
        let u = UnitaryMatrix::from_permutation(p);
        let h = extract_hamiltonian(&u, TimeStep::new(dt)?, branch.into())?;
        let n = p.dim();
        let row_major: Vec<Complex64> = (0..n * n).map(|k| h.matrix[(k / n, k % n)]).collect();
        write_complex(out, &row_major)
    })
}

/// Classifies a state: `*is_ontological` is 1 and `*index` the occupied
/// basis state, or `*is_ontological` is 0.
///
/// # Safety
/// `amplitudes` must be valid for `2 * dim` doubles; `is_ontological` and
/// `index` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn ontic_state_classify(
    amplitudes: *const f64,
    dim: usize,
    tol: f64,
    is_ontological: *mut i32,
    index: *mut usize,
) -> OnticStatus {
    guard(|| {
        let psi = StateVector::new(read_complex(amplitudes, dim)?)?;
        let flag = non_null(is_ontological, "is_ontological")? as *mut i32;
        let idx = non_null(index, "index")? as *mut usize;
        match psi.classify(tol)? {
            StateClass::Ontological { index, .. } => {
                *flag = 1;
                *idx = index;
            }
            StateClass::Superposed => {
                *flag = 0;
                *idx = 0;
            }
        }
        Ok(())
    })
}

/// `W(a, b, c) = |sin(4c - 2a - 2b)| / 2`.
#[no_mangle]
pub extern "C" fn ontic_mousedrop_density(a: f64, b: f64, c: f64) -> f64 {
    bell::mousedrop_density(a, b, c)
}

fn method(kind: OnticMethod, n: u64) -> Method {
    match kind {
        OnticMethod::MonteCarlo => Method::MonteCarlo { samples: n },
        OnticMethod::Quadrature => Method::Quadrature {
            panels: usize::try_from(n).unwrap_or(usize::MAX),
        },
    }
}

fn estimate(e: &bell::CorrelationEstimate) -> OnticEstimate {
    OnticEstimate {
        value: e.value,
        std_error: e.std_error,
        n: e.n,
    }
}

/// `E(a, b)`, angles in radians. `n` is the sample count for Monte Carlo
/// or the panel count for quadrature.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ontic_bell_correlation(
    a: f64,
    b: f64,
    kind: OnticMethod,
    n: u64,
    seed: u64,
    out: *mut OnticEstimate,
) -> OnticStatus {
    guard(|| {
        let e = bell::correlation(a, b, method(kind, n), seed)?;
        *(non_null(out, "out")? as *mut OnticEstimate) = estimate(&e);
        Ok(())
    })
}

/// CHSH combination `E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ontic_bell_chsh(
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
    kind: OnticMethod,
    n: u64,
    seed: u64,
    out: *mut OnticChsh,
) -> OnticStatus {
    guard(|| {
        let angles = ChshAngles { a, a_prime, b, b_prime };
        let r = bell::chsh(angles, method(kind, n), seed)?;
        *(non_null(out, "out")? as *mut OnticChsh) = OnticChsh {
            s: r.s,
            s_std_error: r.s_std_error,
            ab: estimate(&r.ab),
            abp: estimate(&r.abp),
            apb: estimate(&r.apb),
            apbp: estimate(&r.apbp),
            quantum_reference_s: r.quantum_reference_s,
            classical_bound: r.classical_bound,
            tsirelson_bound: r.tsirelson_bound,
        };
        Ok(())
    })
}

/// Total variation distance between the hidden-variable densities at
/// settings `(a, b)` and `(a', b')`.
#[no_mangle]
pub extern "C" fn ontic_counterfactual_shift(a: f64, b: f64, a_prime: f64, b_prime: f64) -> f64 {
    bell::counterfactual_shift(a, b, a_prime, b_prime)
}
