//! C ABI for the simulator: opaque handles, integer status codes and a
//! cbindgen-generated header (`include/cfmimo.h`).
//!
//! Conventions:
//! * Every fallible call returns a [`CfmStatus`]; `CFM_STATUS_OK` is 0 and
//!   the non-zero codes match the CLI exit codes (2 configuration,
//!   3 numerical, 4 I/O; 1 flags null/invalid arguments).
//! * On failure a thread-local message is set, readable via
//!   [`cfm_last_error`] until the next failing call on the same thread.
//! * Handles are created and destroyed only by this library; pass them back
//!   to the matching `*_free` function exactly once.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::path::Path;
use std::ptr;

use cfmimo::assignment;
use cfmimo::config::SimConfig;
use cfmimo::harness::{emit_results, run_experiment, summary_json, ExperimentResult};
use cfmimo::Error;

/// Status code of every fallible C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfmStatus {
    Ok = 0,
    NullArgument = 1,
    ConfigError = 2,
    NumericalError = 3,
    IoError = 4,
}

/// Opaque simulation configuration.
pub struct CfmConfig {
    inner: SimConfig,
}

/// Opaque experiment result.
pub struct CfmResult {
    inner: ExperimentResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let stored = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = stored);
}

fn fail(status: CfmStatus, message: &str) -> CfmStatus {
    set_last_error(message);
    status
}

fn fail_with(error: &Error) -> CfmStatus {
    let status = match error {
        Error::Config(_) | Error::Contract(_) => CfmStatus::ConfigError,
        Error::Numerical(_) => CfmStatus::NumericalError,
        Error::Io { .. } => CfmStatus::IoError,
    };
    fail(status, &error.to_string())
}

/// # Safety
/// `s` must be a valid NUL-terminated string or null.
unsafe fn utf8_arg<'a>(s: *const c_char) -> Option<&'a str> {
    if s.is_null() {
        return None;
    }
    CStr::from_ptr(s).to_str().ok()
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn cfm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// New configuration with the built-in defaults. Free with
/// [`cfm_config_free`].
#[no_mangle]
pub extern "C" fn cfm_config_default() -> *mut CfmConfig {
    Box::into_raw(Box::new(CfmConfig { inner: SimConfig::default() }))
}

/// Load a configuration file (`key = value` lines, `#` comments).
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cfm_config_load(
    path: *const c_char,
    out: *mut *mut CfmConfig,
) -> CfmStatus {
    if out.is_null() {
        return fail(CfmStatus::NullArgument, "out pointer is null");
    }
    let Some(path) = utf8_arg(path) else {
        return fail(CfmStatus::NullArgument, "path is null or not UTF-8");
    };
    match SimConfig::from_file(Path::new(path)) {
        Ok(config) => {
            *out = Box::into_raw(Box::new(CfmConfig { inner: config }));
            CfmStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Set one configuration field by its config-file key, e.g.
/// `cfm_config_set(cfg, "m", "50")`. Unknown keys are rejected.
///
/// # Safety
/// `config` must be a live handle from this library; `key` and `value` must
/// be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cfm_config_set(
    config: *mut CfmConfig,
    key: *const c_char,
    value: *const c_char,
) -> CfmStatus {
    let Some(config) = config.as_mut() else {
        return fail(CfmStatus::NullArgument, "config handle is null");
    };
    let (Some(key), Some(value)) = (utf8_arg(key), utf8_arg(value)) else {
        return fail(CfmStatus::NullArgument, "key or value is null or not UTF-8");
    };
    match config.inner.apply_kv(key, value) {
        Ok(()) => CfmStatus::Ok,
        Err(e) => fail_with(&e),
    }
}

/// # Safety
/// `config` must be a handle from this library, not yet freed; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn cfm_config_free(config: *mut CfmConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the experiment at the configuration's single (L, K) point. Free the
/// result with [`cfm_result_free`].
///
/// # Safety
/// `config` must be a live handle; `out` must point to writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn cfm_run(config: *const CfmConfig, out: *mut *mut CfmResult) -> CfmStatus {
    if out.is_null() {
        return fail(CfmStatus::NullArgument, "out pointer is null");
    }
    let Some(config) = config.as_ref() else {
        return fail(CfmStatus::NullArgument, "config handle is null");
    };
    let sweep = [(config.inner.l, config.inner.k)];
    match run_experiment(&config.inner, &sweep) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(CfmResult { inner: result }));
            CfmStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Write `sumrate_vs_L.csv`, `rate_cdf.csv` and `summary.json` into
/// `out_dir` (created if missing).
///
/// # Safety
/// `result` must be a live handle; `out_dir` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cfm_result_write(
    result: *const CfmResult,
    out_dir: *const c_char,
) -> CfmStatus {
    let Some(result) = result.as_ref() else {
        return fail(CfmStatus::NullArgument, "result handle is null");
    };
    let Some(out_dir) = utf8_arg(out_dir) else {
        return fail(CfmStatus::NullArgument, "out_dir is null or not UTF-8");
    };
    match emit_results(&result.inner, Path::new(out_dir)) {
        Ok(()) => CfmStatus::Ok,
        Err(e) => fail_with(&e),
    }
}

/// The summary.json payload as a newly allocated string; free it with
/// [`cfm_string_free`]. Null only if `result` is null.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn cfm_result_summary_json(result: *const CfmResult) -> *mut c_char {
    let Some(result) = result.as_ref() else {
        set_last_error("result handle is null");
        return ptr::null_mut();
    };
    let json = summary_json(&result.inner);
    CString::new(json.replace('\0', "?"))
        .map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `result` must be a handle from this library, not yet freed; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn cfm_result_free(result: *mut CfmResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must come from [`cfm_result_summary_json`] and not be freed twice;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn cfm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Maximum-weight one-to-one assignment of `rows` users to `cols` items
/// (rows ≤ cols). `weights` is row-major with `rows * cols` entries;
/// `assignment_out` receives one column index per row; `objective_out` may
/// be null.
///
/// # Safety
/// `weights` must point to `rows * cols` doubles and `assignment_out` to
/// `rows` writable `size_t` slots.
#[no_mangle]
pub unsafe extern "C" fn cfm_hungarian_max(
    weights: *const c_double,
    rows: usize,
    cols: usize,
    assignment_out: *mut usize,
    objective_out: *mut c_double,
) -> CfmStatus {
    if weights.is_null() || assignment_out.is_null() {
        return fail(CfmStatus::NullArgument, "weights or assignment_out is null");
    }
    let data = std::slice::from_raw_parts(weights, rows.saturating_mul(cols));
    let matrix = nalgebra_matrix(data, rows, cols);
    match assignment::hungarian_max(&matrix) {
        Ok(result) => {
            let out = std::slice::from_raw_parts_mut(assignment_out, rows);
            out.copy_from_slice(&result.assigned_vc);
            if !objective_out.is_null() {
                *objective_out = result.objective;
            }
            CfmStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

fn nalgebra_matrix(data: &[f64], rows: usize, cols: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(rows, cols, |r, c| data[r * cols + c])
}
