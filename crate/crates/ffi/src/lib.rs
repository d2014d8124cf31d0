//! C ABI over `esfcheck`.
//!
//! Every fallible function returns an [`EsfStatus`]; on failure the message
//! is available from [`esfcheck_last_error`] on the same thread. Strings
//! handed out by this library are NUL-terminated, owned by the caller, and
//! released with [`esfcheck_string_free`]. The engine state is an opaque
//! [`EsfHandle`] released with [`esfcheck_state_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use esfcheck::decider::{decide, DecideMode};
use esfcheck::padic::find_certificate;
use esfcheck::{esf, verify_certificate, EsfState, ProgressionParams, ValuationCertificate, VerifyMode};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsfStatus {
    Ok = 0,
    /// Bad parameters, e.g. `k > n` or `a = 0`.
    InvalidArgument = 1,
    /// Input JSON could not be parsed as a certificate.
    Parse = 2,
    /// A certificate was checked and rejected.
    VerifyFailed = 3,
    /// No witness prime exists for the query.
    NotFound = 4,
    NullPointer = 5,
    /// Anything else, including a caught panic.
    Internal = 6,
}

/// Opaque streaming engine for `S_{a,b}(n, k)`, `k <= kmax`.
pub struct EsfHandle {
    state: EsfState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &esfcheck::Error) -> EsfStatus {
    use esfcheck::Error::*;
    match e {
        Parse(_) | Json(_) => EsfStatus::Parse,
        Io(_) | Checkpoint(_) | ClaimViolation { .. } | DusartViolation { .. } => EsfStatus::Internal,
        _ => EsfStatus::InvalidArgument,
    }
}

/// Runs `f`, records any error, and converts panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), (EsfStatus, String)>) -> EsfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EsfStatus::Internal
        }
    }
}

fn lib_err(e: esfcheck::Error) -> (EsfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (EsfStatus, String) {
    (EsfStatus::NullPointer, "null pointer argument".into())
}

fn params(a: u64, b: u64) -> Result<ProgressionParams, (EsfStatus, String)> {
    ProgressionParams::new(a, b).map_err(lib_err)
}

fn check_k(n: u64, k: u64) -> Result<(), (EsfStatus, String)> {
    if k == 0 || k > n {
        return Err(lib_err(esfcheck::Error::KOutOfRange { k, n }));
    }
    Ok(())
}

/// # Safety
/// `out` must be null or valid for a pointer write.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (EsfStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    let c = CString::new(s).map_err(|_| (EsfStatus::Internal, "interior NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn esfcheck_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null if none.
/// Free with `esfcheck_string_free`.
#[no_mangle]
pub extern "C" fn esfcheck_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an engine at `n = 0`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_state_new(a: u64, b: u64, kmax: u32, out: *mut *mut EsfHandle) -> EsfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let state = EsfState::new(params(a, b)?, kmax as usize).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EsfHandle { state }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `esfcheck_state_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_state_free(h: *mut EsfHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Advances the engine to `n` terms; never moves backwards.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_state_advance_to(h: *mut EsfHandle, n: u64) -> EsfStatus {
    guard(|| {
        let h = h.as_mut().ok_or_else(null)?;
        if n < h.state.n() {
            return Err((EsfStatus::InvalidArgument, format!("engine is at n = {}, cannot rewind to {n}", h.state.n())));
        }
        h.state.advance_to(n);
        Ok(())
    })
}

/// Current number of terms, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_state_n(h: *const EsfHandle) -> u64 {
    h.as_ref().map_or(0, |h| h.state.n())
}

/// `S(n, k)` at the engine's current `n`, as `p/q` or an integer.
///
/// # Safety
/// `h` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_state_value(h: *const EsfHandle, k: u32, out: *mut *mut c_char) -> EsfStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        if k as usize > h.state.kmax() {
            return Err((EsfStatus::InvalidArgument, format!("k = {k} exceeds kmax = {}", h.state.kmax())));
        }
        put_string(out, h.state.value(k as usize).to_string())
    })
}

/// # Safety
/// `h` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_state_is_integer(h: *const EsfHandle, k: u32, out: *mut bool) -> EsfStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        if k as usize > h.state.kmax() {
            return Err((EsfStatus::InvalidArgument, format!("k = {k} exceeds kmax = {}", h.state.kmax())));
        }
        *out = h.state.is_integer(k as usize);
        Ok(())
    })
}

/// Exact `S_{a,b}(n, k)` as a string.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_compute(a: u64, b: u64, n: u64, k: u64, out: *mut *mut c_char) -> EsfStatus {
    guard(|| {
        check_k(n, k)?;
        let v = esf(params(a, b)?, n, k).map_err(lib_err)?;
        put_string(out, v.to_string())
    })
}

/// Decision JSON. `certify = false` answers from the exception set alone.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_decide_json(
    a: u64,
    b: u64,
    n: u64,
    k: u64,
    certify: bool,
    out: *mut *mut c_char,
) -> EsfStatus {
    guard(|| {
        let mode = if certify { DecideMode::Certify } else { DecideMode::Theorem };
        let d = decide(params(a, b)?, n, k, mode).map_err(lib_err)?;
        put_string(out, serde_json::to_string(&d).map_err(|e| (EsfStatus::Internal, e.to_string()))?)
    })
}

/// Valuation certificate JSON; `NotFound` when no witness prime qualifies.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_witness_json(a: u64, b: u64, n: u64, k: u64, out: *mut *mut c_char) -> EsfStatus {
    guard(|| {
        check_k(n, k)?;
        let cert = find_certificate(params(a, b)?, n, k)
            .ok_or_else(|| (EsfStatus::NotFound, format!("no witness prime for ({a}, {b}, {n}, {k})")))?;
        put_string(out, cert.to_json())
    })
}

/// Checks a certificate. Returns `Ok` when it passes, `VerifyFailed` when it
/// is rejected; in both cases `report_out`, if non-null, receives the
/// report JSON.
///
/// # Safety
/// `cert_json` must be a NUL-terminated string; `report_out` null or valid
/// for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn esfcheck_verify_json(
    cert_json: *const c_char,
    exhaustive: bool,
    report_out: *mut *mut c_char,
) -> EsfStatus {
    guard(|| {
        if cert_json.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(cert_json)
            .to_str()
            .map_err(|_| (EsfStatus::Parse, "certificate is not UTF-8".to_string()))?;
        let cert: ValuationCertificate =
            serde_json::from_str(text).map_err(|e| (EsfStatus::Parse, format!("malformed certificate: {e}")))?;
        let mode = if exhaustive { VerifyMode::Exhaustive } else { VerifyMode::Fast };
        let report = verify_certificate(&cert, mode).map_err(lib_err)?;
        if !report_out.is_null() {
            put_string(report_out, serde_json::to_string(&report).map_err(|e| (EsfStatus::Internal, e.to_string()))?)?;
        }
        if report.passed {
            Ok(())
        } else {
            Err((EsfStatus::VerifyFailed, format!("certificate rejected: {:?}", report.failed)))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_internal_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, EsfStatus::Internal);
        let msg = unsafe { CString::from_raw(esfcheck_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn error_messages_survive_interior_nul() {
        assert_eq!(guard(|| Err((EsfStatus::Parse, "a\0b".into()))), EsfStatus::Parse);
        let msg = unsafe { CString::from_raw(esfcheck_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }

    #[test]
    fn library_errors_map_to_statuses() {
        assert_eq!(status_of(&esfcheck::Error::Parse("x".into())), EsfStatus::Parse);
        assert_eq!(status_of(&esfcheck::Error::KOutOfRange { k: 3, n: 2 }), EsfStatus::InvalidArgument);
    }
}
