//! C ABI for `qmix`.
//!
//! Matrices and densities are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`QmixStatus`]; on failure, [`qmix_last_error_message`] describes the most
//! recent error on the calling thread. Complex entries cross the boundary as
//! interleaved `(re, im)` doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use qmix::density::{self, CDensity, Classification, Observable, QDensity, DENSITY_TOL};
use qmix::dynamics::{self, Generator};
use qmix::{io, scenario, CMatrix, Error, QMatrix};

/// Result code of every fallible call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonSquare = 4,
    NotHermitian = 5,
    NotAntiHermitian = 6,
    NotPositive = 7,
    TraceNotOne = 8,
    RankOutOfRange = 9,
    RankOne = 10,
    NotPurifiable = 11,
    NotUnitary = 12,
    DriftExceeded = 13,
    NotNormalized = 14,
    Schema = 15,
    /// Internal numerical inconsistency: pairing, orthogonality, adjoint image.
    Numerical = 16,
    Panic = 17,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmixClassification {
    Proper = 0,
    Improper = 1,
}

/// Quaternionic matrix `alpha + j beta`.
pub struct QmixMatrix {
    inner: QMatrix,
}

/// Validated quaternionic density matrix.
pub struct QmixDensity {
    inner: QDensity,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QmixStatus {
    match e {
        Error::DimensionMismatch { .. } => QmixStatus::DimensionMismatch,
        Error::NonSquare { .. } => QmixStatus::NonSquare,
        Error::NotHermitian { .. } => QmixStatus::NotHermitian,
        Error::NotAntiHermitian { .. } => QmixStatus::NotAntiHermitian,
        Error::NotPositive { .. } => QmixStatus::NotPositive,
        Error::TraceNotOne { .. } => QmixStatus::TraceNotOne,
        Error::RankOutOfRange { .. } => QmixStatus::RankOutOfRange,
        Error::RankOne => QmixStatus::RankOne,
        Error::NotPurifiable { .. } => QmixStatus::NotPurifiable,
        Error::NotUnitary { .. } => QmixStatus::NotUnitary,
        Error::DriftExceeded { .. } => QmixStatus::DriftExceeded,
        Error::NotNormalized { .. } => QmixStatus::NotNormalized,
        Error::Schema { .. } => QmixStatus::Schema,
        Error::InvalidArgument(_) | Error::PropositionViolated { .. } | Error::WitnessNotFound { .. } => {
            QmixStatus::InvalidArgument
        }
        Error::NotInChiImage { .. }
        | Error::PairingFailure { .. }
        | Error::NotOrthogonal { .. }
        | Error::InvalidProjectorFamily { .. } => QmixStatus::Numerical,
    }
}

struct Fail(QmixStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QmixStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QmixStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            QmixStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            QmixStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn read_block(p: *const f64, rows: usize, cols: usize) -> CMatrix {
    let data = std::slice::from_raw_parts(p, 2 * rows * cols);
    CMatrix::from_fn(rows, cols, |r, c| {
        let k = 2 * (r * cols + c);
        Complex64::new(data[k], data[k + 1])
    })
}

unsafe fn write_block(m: &CMatrix, p: *mut f64) {
    let cols = m.ncols();
    let data = std::slice::from_raw_parts_mut(p, 2 * m.nrows() * cols);
    for r in 0..m.nrows() {
        for c in 0..cols {
            let k = 2 * (r * cols + c);
            data[k] = m[(r, c)].re;
            data[k + 1] = m[(r, c)].im;
        }
    }
}

fn complex_density(m: &QMatrix, tol: f64) -> Result<CDensity, Fail> {
    if m.beta_norm() != 0.0 {
        return Err(Fail(
            QmixStatus::InvalidArgument,
            format!("expected a complex density (no beta block), |beta|_F = {:e}", m.beta_norm()),
        ));
    }
    Ok(CDensity::new(m.alpha().clone(), tol)?)
}

fn tol_or_default(tol: f64) -> f64 {
    if tol > 0.0 {
        tol
    } else {
        DENSITY_TOL
    }
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next `qmix_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qmix_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a matrix from interleaved row-major blocks of `2 * rows * cols`
/// doubles. `beta` may be null for a complex matrix.
///
/// # Safety
/// `alpha` (and `beta` when non-null) must point to `2 * rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_new(
    rows: usize,
    cols: usize,
    alpha: *const f64,
    beta: *const f64,
    out: *mut *mut QmixMatrix,
) -> QmixStatus {
    guard(|| {
        if alpha.is_null() {
            return Err(null("alpha"));
        }
        let a = read_block(alpha, rows, cols);
        let b = if beta.is_null() {
            CMatrix::zeros(rows, cols)
        } else {
            read_block(beta, rows, cols)
        };
        if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Fail(QmixStatus::InvalidArgument, "non-finite entry".into()));
        }
        put(out, QmixMatrix { inner: QMatrix::new(a, b)? })
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_free(m: *mut QmixMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_rows(m: *const QmixMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rows())
}

/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_cols(m: *const QmixMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.cols())
}

/// Copy the blocks out. Either destination may be null to skip it.
///
/// # Safety
/// `m` must be a live handle; non-null destinations must hold
/// `2 * rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_blocks(m: *const QmixMatrix, alpha: *mut f64, beta: *mut f64) -> QmixStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.inner;
        if !alpha.is_null() {
            write_block(m.alpha(), alpha);
        }
        if !beta.is_null() {
            write_block(m.beta(), beta);
        }
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_from_json(json: *const c_char, out: *mut *mut QmixMatrix) -> QmixStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(QmixStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        put(out, QmixMatrix { inner: io::parse_matrix(text)? })
    })
}

fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|e| Fail(QmixStatus::InvalidArgument, e.to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Canonical JSON; release with [`qmix_string_free`].
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_matrix_to_json(m: *const QmixMatrix, out: *mut *mut c_char) -> QmixStatus {
    guard(|| put_string(out, io::serialize_matrix(&deref(m, "matrix")?.inner)))
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qmix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Validate `m` as a density matrix. `tol <= 0` selects the default.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_validate(m: *const QmixMatrix, tol: f64, out: *mut *mut QmixDensity) -> QmixStatus {
    guard(|| {
        let d = density::validate(&deref(m, "matrix")?.inner, tol_or_default(tol))?;
        put(out, QmixDensity { inner: d })
    })
}

/// # Safety
/// `d` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_free(d: *mut QmixDensity) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_classification(
    d: *const QmixDensity,
    out: *mut QmixClassification,
) -> QmixStatus {
    guard(|| {
        let c = match deref(d, "density")?.inner.classification() {
            Classification::Proper => QmixClassification::Proper,
            Classification::Improper => QmixClassification::Improper,
        };
        if out.is_null() {
            return Err(null("out"));
        }
        *out = c;
        Ok(())
    })
}

/// `|rho_beta|_F`, or NaN for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_beta_norm(d: *const QmixDensity) -> f64 {
    d.as_ref().map_or(f64::NAN, |d| d.inner.beta_norm())
}

/// Quaternionic rank, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_rank(d: *const QmixDensity) -> usize {
    d.as_ref().map_or(0, |d| d.inner.rank())
}

/// Copy of the density as a matrix handle.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_matrix(d: *const QmixDensity, out: *mut *mut QmixMatrix) -> QmixStatus {
    guard(|| {
        let m = deref(d, "density")?.inner.matrix().clone();
        put(out, QmixMatrix { inner: m })
    })
}

/// Complex projection `rho_alpha`, returned as a matrix with zero beta.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_density_project(d: *const QmixDensity, out: *mut *mut QmixMatrix) -> QmixStatus {
    guard(|| {
        let p = density::complex_projection(&deref(d, "density")?.inner);
        put(out, QmixMatrix { inner: QMatrix::from_complex(p.into_matrix()) })
    })
}

/// Quaternionic density of rank `rank` whose projection is `rho_alpha`
/// (a complex matrix, zero beta).
///
/// # Safety
/// `rho_alpha` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_lift(rho_alpha: *const QmixMatrix, rank: usize, out: *mut *mut QmixDensity) -> QmixStatus {
    guard(|| {
        let c = complex_density(&deref(rho_alpha, "rho_alpha")?.inner, DENSITY_TOL)?;
        put(out, QmixDensity { inner: density::lift(&c, rank)? })
    })
}

/// Rank-one quaternionic density projecting onto a rank <= 2 `rho_alpha`.
///
/// # Safety
/// `rho_alpha` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_purify(rho_alpha: *const QmixMatrix, out: *mut *mut QmixDensity) -> QmixStatus {
    guard(|| {
        let c = complex_density(&deref(rho_alpha, "rho_alpha")?.inner, DENSITY_TOL)?;
        put(out, QmixDensity { inner: density::purify(&c)? })
    })
}

/// `Re Tr(A rho)` for a hermitian quaternionic observable `A`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_expectation(
    observable: *const QmixMatrix,
    d: *const QmixDensity,
    out: *mut f64,
) -> QmixStatus {
    guard(|| {
        let a = Observable::new(deref(observable, "observable")?.inner.clone())?;
        let v = density::expectation(&a, &deref(d, "density")?.inner)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = v;
        Ok(())
    })
}

/// Evolve under the constant anti-hermitian generator `h` for time `t` with
/// `steps` RK4 steps.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_evolve(
    d: *const QmixDensity,
    h: *const QmixMatrix,
    t: f64,
    steps: usize,
    out: *mut *mut QmixDensity,
) -> QmixStatus {
    guard(|| {
        if steps == 0 || !t.is_finite() {
            return Err(Fail(QmixStatus::InvalidArgument, "steps must be positive and t finite".into()));
        }
        let gen = Generator::constant(deref(h, "generator")?.inner.clone())?;
        let run = dynamics::integrate(&deref(d, "density")?.inner, &gen, t, steps)?;
        put(out, QmixDensity { inner: run.state })
    })
}

/// Run the system/apparatus scenario and return its JSON report; release
/// with [`qmix_string_free`]. Angles are the polar and azimuthal angle of
/// the spin axis in radians.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qmix_scenario_json(
    c_plus_re: f64,
    c_plus_im: f64,
    c_minus_re: f64,
    c_minus_im: f64,
    theta: f64,
    phi: f64,
    out: *mut *mut c_char,
) -> QmixStatus {
    guard(|| {
        let r = scenario::run_scenario(
            Complex64::new(c_plus_re, c_plus_im),
            Complex64::new(c_minus_re, c_minus_im),
            theta,
            phi,
        )?;
        let text = serde_json::to_string_pretty(&r).expect("reports serialize");
        put_string(out, text)
    })
}
