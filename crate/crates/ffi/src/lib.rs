//! C interface to `coupling_scatter`.
//!
//! Problems live behind an opaque `CsProblem` handle built from the same JSON
//! config the command line reads. Every call returns a `CsStatus`; on failure
//! `cs_last_error_message` copies the message of the most recent error on the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coupling_scatter::config::parse_config;
use coupling_scatter::spectral::{boundary_angles, negative_eigenvalue_count};
use coupling_scatter::zeros::{default_nodes, disk_zero_count};
use coupling_scatter::{coefficients, reflection, transfer_matrix, Complex64, Error, ScatteringProblem};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad config, argument or problem.
    InvalidInput = 2,
    /// `b` vanishes identically.
    Degenerate = 3,
    /// Integration, contour or search failure.
    SolverFailure = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for CsComplex {
    fn from(z: Complex64) -> Self {
        CsComplex { re: z.re, im: z.im }
    }
}

impl From<CsComplex> for Complex64 {
    fn from(z: CsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Opaque problem handle.
pub struct CsProblem {
    inner: ScatteringProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::Degenerate => CsStatus::Degenerate,
        Error::IntegrationFailure { .. }
        | Error::Precision { .. }
        | Error::ContourCollision { .. }
        | Error::WindingUnresolved { .. }
        | Error::NoWitness => CsStatus::SolverFailure,
        _ => CsStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CsStatus>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            CsStatus::Panic
        }
    }
}

fn fail(e: Error) -> CsStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> CsStatus {
    set_error(format!("{what} is null"));
    CsStatus::NullPointer
}

unsafe fn problem<'a>(p: *const CsProblem) -> Result<&'a ScatteringProblem, CsStatus> {
    // SAFETY: caller passes a handle from cs_problem_from_json or null
    unsafe { p.as_ref() }.map(|h| &h.inner).ok_or_else(|| null("problem"))
}

/// Parses a JSON config (the `problem` block is required, `command` is ignored).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_problem_from_json(json: *const c_char, out: *mut *mut CsProblem) -> CsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; caller guarantees NUL termination
        let text =
            unsafe { CStr::from_ptr(json) }.to_str().map_err(|_| fail(Error::Config("config is not UTF-8".into())))?;
        let run = parse_config(text).map_err(fail)?;
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(Box::new(CsProblem { inner: run.problem })) };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must come from `cs_problem_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cs_problem_free(p: *mut CsProblem) {
    if !p.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(p) });
    }
}

/// `a(λ)`, `b(λ)` and an absolute error estimate. Any output pointer may be null.
///
/// # Safety
/// `p` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_coefficients(
    p: *const CsProblem,
    lambda: CsComplex,
    a: *mut CsComplex,
    b: *mut CsComplex,
    err: *mut f64,
) -> CsStatus {
    guard(|| {
        let problem = unsafe { problem(p) }?;
        let c = coefficients(problem, lambda.into()).map_err(fail)?;
        // SAFETY: each pointer is checked before writing
        unsafe {
            if !a.is_null() {
                *a = c.a.into();
            }
            if !b.is_null() {
                *b = c.b.into();
            }
            if !err.is_null() {
                *err = c.err;
            }
        }
        Ok(())
    })
}

/// Transfer matrix from `0-` to `1+` in row-major order.
///
/// # Safety
/// `p` must be a live handle and `out` must point to 4 writable `CsComplex`.
#[no_mangle]
pub unsafe extern "C" fn cs_transfer_matrix(p: *const CsProblem, lambda: CsComplex, out: *mut CsComplex) -> CsStatus {
    guard(|| {
        let problem = unsafe { problem(p) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = transfer_matrix(problem, lambda.into()).map_err(fail)?;
        for (i, z) in m.entries.iter().flatten().enumerate() {
            // SAFETY: caller provides room for four entries
            unsafe { *out.add(i) = (*z).into() };
        }
        Ok(())
    })
}

/// Reflection probability `|β/α|²` and flux defect at real `λ`.
///
/// # Safety
/// `p` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_reflection(
    p: *const CsProblem,
    lambda: f64,
    reflection_out: *mut f64,
    flux_defect: *mut f64,
) -> CsStatus {
    guard(|| {
        let problem = unsafe { problem(p) }?;
        let r = reflection(problem, lambda).map_err(fail)?;
        // SAFETY: each pointer is checked before writing
        unsafe {
            if !reflection_out.is_null() {
                *reflection_out = r.reflection;
            }
            if !flux_defect.is_null() {
                *flux_defect = r.flux_defect;
            }
        }
        Ok(())
    })
}

/// Zeros of `b` in `|λ| ≤ r` with multiplicity; `nodes = 0` picks a default.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_disk_zero_count(p: *const CsProblem, r: f64, nodes: usize, out: *mut usize) -> CsStatus {
    guard(|| {
        let problem = unsafe { problem(p) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(fail(Error::InvalidArgument("radius must be positive and finite".into())));
        }
        let nodes = if nodes == 0 { default_nodes(r) } else { nodes };
        let n = disk_zero_count(problem, r, nodes).map_err(fail)?;
        // SAFETY: checked non-null
        unsafe { *out = n };
        Ok(())
    })
}

/// Negative eigenvalues of `-u'' + (Q + λV) u` with the boundary conditions of `u0`.
///
/// # Safety
/// `p` must be a live handle; `count` writable; `zero_is_eigenvalue` may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_negative_eigenvalue_count(
    p: *const CsProblem,
    lambda: f64,
    count: *mut usize,
    zero_is_eigenvalue: *mut bool,
) -> CsStatus {
    guard(|| {
        let problem = unsafe { problem(p) }?;
        if count.is_null() {
            return Err(null("count"));
        }
        let angles = boundary_angles(problem).map_err(fail)?;
        let c = negative_eigenvalue_count(problem, lambda, angles).map_err(fail)?;
        // SAFETY: count checked above, the flag checked here
        unsafe {
            *count = c.count;
            if !zero_is_eigenvalue.is_null() {
                *zero_is_eigenvalue = c.zero_is_eigenvalue;
            }
        }
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, so a call
/// with `len = 0` sizes the buffer.
///
/// # Safety
/// `buf` must have room for `len` bytes, or be null with `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn cs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: n + 1 <= len bytes are written
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}
