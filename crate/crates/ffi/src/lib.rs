//! C ABI for the `coorbital` crate.
//!
//! Every function returns a [`CcStatus`]; results go through out-pointers.
//! On failure, [`cc_last_error`] returns a message for the calling thread.
//! Handles are opaque and must be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coorbital::error::{AlgebraError, Error, KernelError, ModelError, SolverError};
use coorbital::masses::mass_null_space;
use coorbital::model::{residual, Configuration, MassVector};
use coorbital::solver::{default_grid, enumerate_equal_mass, CentralSolution};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoConvergence = 4,
    CertificateFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A validated configuration of gap angles.
pub struct CcConfiguration {
    inner: Configuration,
}

/// Equal-mass central configuration classes.
pub struct CcSolutionSet {
    inner: Vec<CentralSolution>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> CcStatus {
    match err {
        Error::Kernel(KernelError::Domain { .. }) => CcStatus::Domain,
        Error::Model(ModelError::PartialSum { .. }) => CcStatus::Domain,
        Error::Solver(SolverError::NoConvergence { .. } | SolverError::DomainEscape { .. }) => CcStatus::NoConvergence,
        Error::Algebra(AlgebraError::CertificateFailure(_)) => CcStatus::CertificateFailure,
        _ => CcStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (CcStatus, String)>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CcStatus::Panic
        }
    }
}

fn fail<E: Into<Error>>(e: E) -> (CcStatus, String) {
    let e = e.into();
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (CcStatus, String) {
    (CcStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], (CcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (CcStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_into(values: &[f64], buffer: *mut f64, capacity: usize) -> Result<(), (CcStatus, String)> {
    if capacity < values.len() {
        return Err((
            CcStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, need {}", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if buffer.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `f` (order 0) or its derivative of order 1 to 3 at `x`.
#[no_mangle]
pub unsafe extern "C" fn cc_f_eval(x: f64, order: u8, out: *mut f64) -> CcStatus {
    guard(|| {
        let value = match order {
            0 => coorbital::eval_f(x),
            k => coorbital::eval_f_derivative(x, k),
        }
        .map_err(fail)?;
        write_out(out, value, "out")
    })
}

/// Validates `n` gap angles and returns a new handle.
#[no_mangle]
pub unsafe extern "C" fn cc_configuration_new(
    theta: *const f64,
    n: usize,
    out: *mut *mut CcConfiguration,
) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let angles = slice(theta, n, "theta")?;
        let inner = Configuration::new(angles.to_vec()).map_err(fail)?;
        out.write(Box::into_raw(Box::new(CcConfiguration { inner })));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_configuration_free(config: *mut CcConfiguration) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_configuration_len(config: *const CcConfiguration, out: *mut usize) -> CcStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        write_out(out, c.inner.len(), "out")
    })
}

/// Copies the angles into `buffer`, which must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn cc_configuration_angles(
    config: *const CcConfiguration,
    buffer: *mut f64,
    capacity: usize,
) -> CcStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        copy_into(c.inner.angles(), buffer, capacity)
    })
}

/// Inf-norm of the residual; a null `masses` means equal masses.
#[no_mangle]
pub unsafe extern "C" fn cc_residual(
    config: *const CcConfiguration,
    masses: *const f64,
    n_masses: usize,
    out: *mut f64,
) -> CcStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let mu = if masses.is_null() {
            MassVector::equal(c.inner.len())
        } else {
            MassVector::new(slice(masses, n_masses, "masses")?.to_vec()).map_err(fail)?
        };
        let r = residual(&c.inner, mu.as_slice()).map_err(fail)?;
        write_out(out, r.inf_norm, "out")
    })
}

/// Dimension of the admissible mass space and, when one exists, a positive
/// representative normalized to sum `n` (written to `buffer`).
#[no_mangle]
pub unsafe extern "C" fn cc_inverse_masses(
    config: *const CcConfiguration,
    null_dim: *mut usize,
    found: *mut bool,
    buffer: *mut f64,
    capacity: usize,
) -> CcStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let space = mass_null_space(&c.inner).map_err(fail)?;
        write_out(null_dim, space.null_dim, "null_dim")?;
        match &space.positive_representative {
            Some(m) => {
                copy_into(m.as_slice(), buffer, capacity)?;
                write_out(found, true, "found")
            }
            None => write_out(found, false, "found"),
        }
    })
}

/// Equal-mass central configuration classes for `n` satellites; `grid = 0`
/// uses the default starting grid.
#[no_mangle]
pub unsafe extern "C" fn cc_enumerate(n: usize, grid: usize, out: *mut *mut CcSolutionSet) -> CcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = if grid == 0 { default_grid(n.max(2)) } else { grid };
        let inner = enumerate_equal_mass(n, grid).map_err(fail)?;
        out.write(Box::into_raw(Box::new(CcSolutionSet { inner })));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_solution_set_free(set: *mut CcSolutionSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_solution_set_len(set: *const CcSolutionSet, out: *mut usize) -> CcStatus {
    guard(|| {
        let s = set.as_ref().ok_or_else(|| null("set"))?;
        write_out(out, s.inner.len(), "out")
    })
}

unsafe fn solution<'a>(set: *const CcSolutionSet, index: usize) -> Result<&'a CentralSolution, (CcStatus, String)> {
    let s = set.as_ref().ok_or_else(|| null("set"))?;
    s.inner.get(index).ok_or_else(|| {
        (
            CcStatus::InvalidArgument,
            format!("index {index} out of range for {} solutions", s.inner.len()),
        )
    })
}

/// Angles of solution `index` (canonical form).
#[no_mangle]
pub unsafe extern "C" fn cc_solution_angles(
    set: *const CcSolutionSet,
    index: usize,
    buffer: *mut f64,
    capacity: usize,
) -> CcStatus {
    guard(|| copy_into(solution(set, index)?.config.angles(), buffer, capacity))
}

#[no_mangle]
pub unsafe extern "C" fn cc_solution_residual(set: *const CcSolutionSet, index: usize, out: *mut f64) -> CcStatus {
    guard(|| write_out(out, solution(set, index)?.residual_inf, "out"))
}

/// Runs the square-case certificate and returns its JSON report; release it
/// with [`cc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cc_certify_square(out_json: *mut *mut c_char) -> CcStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let report = coorbital::algebra::certify_square_case().map_err(fail)?;
        let text = serde_json::to_string(&report).map_err(|e| (CcStatus::Panic, e.to_string()))?;
        let c = CString::new(text).map_err(|e| (CcStatus::Panic, e.to_string()))?;
        out_json.write(c.into_raw());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
