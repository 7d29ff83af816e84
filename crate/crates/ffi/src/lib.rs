//! C ABI over `photon_sql`.
//!
//! States live behind the opaque `PsState` handle. Every fallible function
//! returns a `PsStatus`; on failure `ps_last_error_kind` and
//! `ps_last_error_message` describe the most recent error on the calling
//! thread. Strings returned through `char **` out-parameters are owned by
//! the caller and must be released with `ps_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use photon_sql::numeric::UniformGrid;
use photon_sql::observables::{
    absorption_pattern, conditional_width, marginal_width, scale_relative, total_absorption_rate, width_report,
    MonteCarloConfig,
};
use photon_sql::oracle::{compare, DEFAULT_REL_TOL};
use photon_sql::soliton::{apply_dispersion, make_soliton, uql_convergence_metric};
use photon_sql::state::{SpectralEnvelope, StateSpec};
use photon_sql::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input.
    Validation = 3,
    /// The requested quantity has no finite value for this state.
    Computation = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Opaque N-photon state.
pub struct PsState {
    inner: StateSpec,
}

struct LastError {
    kind: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(kind: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(LastError { kind: clean(kind), message: clean(message) }));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: PsStatus, kind: &str, message: &str) -> PsStatus {
    set_error(kind, message);
    status
}

fn from_error(e: &Error) -> PsStatus {
    let status = if e.is_validation() { PsStatus::Validation } else { PsStatus::Computation };
    fail(status, e.kind(), &e.to_string())
}

/// Runs `f` with panics and library errors mapped to status codes.
fn guard(f: impl FnOnce() -> Result<(), PsStatus>) -> PsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(PsStatus::Panic, "Panic", "internal panic caught at the C boundary"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, PsStatus>;
}

impl<T> OrStatus<T> for photon_sql::Result<T> {
    fn or_status(self) -> Result<T, PsStatus> {
        self.map_err(|e| from_error(&e))
    }
}

fn null(what: &str) -> PsStatus {
    fail(PsStatus::NullPointer, "NullPointer", &format!("{what} is null"))
}

unsafe fn state_ref<'a>(state: *const PsState) -> Result<&'a StateSpec, PsStatus> {
    // SAFETY: the caller passes a handle from this library or null.
    unsafe { state.as_ref() }.map(|s| &s.inner).ok_or_else(|| null("state"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), PsStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: non-null and, per the contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn write_state(out: *mut *mut PsState, state: StateSpec) -> Result<(), PsStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let handle = Box::into_raw(Box::new(PsState { inner: state }));
    // SAFETY: checked non-null above.
    unsafe { out.write(handle) };
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), PsStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(text).map_err(|_| fail(PsStatus::Panic, "Panic", "output contained a NUL byte"))?;
    // SAFETY: checked non-null above.
    unsafe { out.write(c.into_raw()) };
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, PsStatus> {
    serde_json::to_string(value).map_err(|e| fail(PsStatus::Panic, "Json", &e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Kind of the last error on this thread (e.g. "InfiniteMoment"), or null.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_kind() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.kind.as_ptr()))
}

/// Message of the last error on this thread, or null.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}

/// Parses a state document (the JSON accepted by the command-line tool).
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_from_json(json: *const c_char, out: *mut *mut PsState) -> PsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        // SAFETY: non-null, NUL-terminated per the contract.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| fail(PsStatus::InvalidUtf8, "InvalidUtf8", "json is not valid UTF-8"))?;
        let state = StateSpec::from_json(text).or_status()?;
        unsafe { write_state(out, state) }
    })
}

/// Product state of `n` photons with a Gaussian envelope of width `kappa`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_product_gaussian(n: usize, kappa: f64, out: *mut *mut PsState) -> PsStatus {
    guard(|| {
        let state = SpectralEnvelope::gaussian(kappa).and_then(|g| StateSpec::product(n, g)).or_status()?;
        unsafe { write_state(out, state) }
    })
}

/// Coincident-momentum state of `n` photons with a Gaussian envelope.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_coincident_gaussian(n: usize, kappa: f64, out: *mut *mut PsState) -> PsStatus {
    guard(|| {
        let state = SpectralEnvelope::gaussian(kappa).and_then(|g| StateSpec::coincident(n, g)).or_status()?;
        unsafe { write_state(out, state) }
    })
}

/// Kerr soliton with binding `ratio` (< 0), envelope parameter `q` and
/// accumulated dispersion `b_integral`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_soliton(
    n: usize,
    ratio: f64,
    q: f64,
    b_integral: f64,
    out: *mut *mut PsState,
) -> PsStatus {
    guard(|| {
        let state = make_soliton(n, ratio, q, b_integral).or_status()?;
        unsafe { write_state(out, state) }
    })
}

/// Releases a state. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_state_free(state: *mut PsState) {
    if !state.is_null() {
        // SAFETY: allocated by `write_state` via `Box::into_raw`.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Serializes a state to JSON.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_to_json(state: *const PsState, out: *mut *mut c_char) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        unsafe { write_string(out, to_json(s)?) }
    })
}

/// Photon number.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_state_photon_count(state: *const PsState, out: *mut usize) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        unsafe { write_out(out, s.n().get()) }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by `CString::into_raw` in `write_string`.
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn scalar(
    state: *const PsState,
    out: *mut f64,
    f: impl FnOnce(&StateSpec) -> photon_sql::Result<f64>,
) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let v = f(s).or_status()?;
        unsafe { write_out(out, v) }
    })
}

/// RMS center-of-mass width integrated over relative coordinates.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_marginal_width(state: *const PsState, out: *mut f64) -> PsStatus {
    unsafe { scalar(state, out, marginal_width) }
}

/// RMS center-of-mass width on the all-photons-coincident slice.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_conditional_width(state: *const PsState, out: *mut f64) -> PsStatus {
    unsafe { scalar(state, out, conditional_width) }
}

/// Total N-photon absorption rate.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_total_rate(state: *const PsState, out: *mut f64) -> PsStatus {
    unsafe { scalar(state, out, |s| total_absorption_rate(s, None).map(|r| r.total_rate)) }
}

/// Convergence of a compensated soliton toward the coincident-momentum limit.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_uql_metric(state: *const PsState, out: *mut f64) -> PsStatus {
    unsafe { scalar(state, out, uql_convergence_metric) }
}

/// New state with relative coordinates dilated by `gamma`.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_scale_relative(state: *const PsState, gamma: f64, out: *mut *mut PsState) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let scaled = scale_relative(s, gamma).or_status()?;
        unsafe { write_state(out, scaled) }
    })
}

/// New soliton state with `delta` added to its accumulated dispersion.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_apply_dispersion(state: *const PsState, delta: f64, out: *mut *mut PsState) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let next = apply_dispersion(s, delta).or_status()?;
        unsafe { write_state(out, next) }
    })
}

/// Absorption pattern on `points` uniform samples of `[x_min, x_max]`,
/// normalized to unit integral, written to `intensity[0..points]`.
///
/// # Safety
/// `state` must be a valid handle; `intensity` must be null or valid for
/// `points` writes.
#[no_mangle]
pub unsafe extern "C" fn ps_absorption_pattern(
    state: *const PsState,
    x_min: f64,
    x_max: f64,
    points: usize,
    intensity: *mut f64,
) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        if intensity.is_null() {
            return Err(null("intensity"));
        }
        let grid = UniformGrid::spanning(x_min, x_max, points).or_status()?;
        let profile = absorption_pattern(s, &grid).or_status()?;
        // SAFETY: the caller provides room for `points` values.
        let dst = unsafe { std::slice::from_raw_parts_mut(intensity, points) };
        dst.copy_from_slice(&profile.intensity);
        Ok(())
    })
}

/// Width report as JSON.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_width_report_json(state: *const PsState, out: *mut *mut c_char) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let report = width_report(s).or_status()?;
        unsafe { write_string(out, to_json(&report)?) }
    })
}

/// Analytic versus lattice-quadrature comparison as a JSON array.
///
/// # Safety
/// `state` must be a valid handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ps_oracle_compare_json(state: *const PsState, seed: u64, out: *mut *mut c_char) -> PsStatus {
    guard(|| {
        let s = unsafe { state_ref(state) }?;
        let mc = MonteCarloConfig { seed, ..MonteCarloConfig::default() };
        let rows = compare(s, None, &mc, DEFAULT_REL_TOL).or_status()?;
        unsafe { write_string(out, to_json(&rows)?) }
    })
}
