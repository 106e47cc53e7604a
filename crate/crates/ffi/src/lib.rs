//! C ABI over `stable_rates`.
//!
//! Every fallible entry point returns an [`SrStatus`]; on failure the message
//! is kept in a thread-local slot readable through [`sr_last_error_message`].
//! Objects cross the boundary as opaque pointers that must be released with
//! their matching `*_free` function. Panics never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stable_rates::config::{ConfigPatch, ExperimentConfig};
use stable_rates::distances;
use stable_rates::experiments::{self, RunReport};
use stable_rates::fbm::{self, FbmSampler, Hurst, TimeGrid};
use stable_rates::functionals;
use stable_rates::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    HypothesisViolated = 3,
    OutOfDomain = 4,
    ContractViolated = 5,
    BudgetExceeded = 6,
    GenerationFailed = 7,
    AccuracyNotReached = 8,
    InvalidConfig = 9,
    Io = 10,
    BufferTooSmall = 11,
    InvalidUtf8 = 12,
    Panic = 13,
}

/// Which table of a run report to export.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrTable {
    Distances = 0,
    Bounds = 1,
    Rates = 2,
}

/// Opaque fBm sampler on a uniform grid of `[0, 1]`.
pub struct SrFbmSampler {
    inner: FbmSampler,
}

/// Opaque result of an experiment run.
pub struct SrReport {
    inner: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> SrStatus {
    match err {
        Error::Parameter(_) => SrStatus::InvalidParameter,
        Error::Hypothesis(_) => SrStatus::HypothesisViolated,
        Error::Domain(_) => SrStatus::OutOfDomain,
        Error::Contract(_) => SrStatus::ContractViolated,
        Error::Budget(_) => SrStatus::BudgetExceeded,
        Error::Generation(_) => SrStatus::GenerationFailed,
        Error::Accuracy(_) => SrStatus::AccuracyNotReached,
        Error::Config(_) => SrStatus::InvalidConfig,
        Error::Io(_) => SrStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (SrStatus, String)>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SrStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SrStatus::Panic
        }
    }
}

fn lib<T>(r: stable_rates::Result<T>) -> Result<T, (SrStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SrStatus, String) {
    (SrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], (SrStatus, String)> {
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (SrStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies `text` plus a terminating NUL into `buf`. `required` receives the
/// size needed including the NUL, even when `buf` is too small.
unsafe fn copy_string(text: &str, buf: *mut c_char, len: usize, required: *mut usize) -> Result<(), (SrStatus, String)> {
    let needed = text.len() + 1;
    if !required.is_null() {
        required.write(needed);
    }
    if buf.is_null() || len < needed {
        return Err((SrStatus::BufferTooSmall, format!("buffer holds {len} bytes, {needed} required")));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the message of the last failed call on this thread into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null; `required` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn sr_last_error_message(buf: *mut c_char, len: usize, required: *mut usize) -> SrStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_string(&msg, buf, len, required) {
        Ok(()) => SrStatus::Ok,
        Err((s, _)) => s,
    }
}

/// `c_H = sqrt(H Gamma(2H))`, defined for `H >= 1/2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_c_h(hurst: f64, out: *mut f64) -> SrStatus {
    guard(|| {
        let v = lib(Hurst::new(hurst).and_then(functionals::c_h))?;
        write_out(out, v, "out")
    })
}

/// `sigma_H = 2 sum_p rho_H(p)^2` to absolute tolerance `tol`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_sigma_h(hurst: f64, tol: f64, out: *mut f64) -> SrStatus {
    guard(|| {
        let v = lib(Hurst::new(hurst).and_then(|h| functionals::sigma_h_series(h, tol)))?;
        write_out(out, v, "out")
    })
}

/// Correlation of unit-lag fBm increments at lag `p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_rho_h(p: i64, hurst: f64, out: *mut f64) -> SrStatus {
    guard(|| {
        let h = lib(Hurst::new(hurst))?;
        write_out(out, fbm::rho_h(p, h), "out")
    })
}

/// Characteristic function of the stable limit at `(lambda, mu)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_stable_cf_limit(lambda: f64, mu: f64, hurst: f64, out: *mut f64) -> SrStatus {
    guard(|| {
        let h = lib(Hurst::new(hurst))?;
        let v = lib(distances::stable_cf_limit(lambda, mu, h))?;
        write_out(out, v, "out")
    })
}

/// Empirical Wasserstein-1 distance between two samples.
///
/// # Safety
/// `xs` and `ys` must point to `nx` and `ny` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_wasserstein1(xs: *const f64, nx: usize, ys: *const f64, ny: usize, out: *mut f64) -> SrStatus {
    guard(|| {
        let v = lib(distances::wasserstein1(slice(xs, nx, "xs")?, slice(ys, ny, "ys")?))?;
        write_out(out, v, "out")
    })
}

/// Two-sample Kolmogorov distance.
///
/// # Safety
/// Same as [`sr_wasserstein1`].
#[no_mangle]
pub unsafe extern "C" fn sr_kolmogorov(xs: *const f64, nx: usize, ys: *const f64, ny: usize, out: *mut f64) -> SrStatus {
    guard(|| {
        let v = lib(distances::kolmogorov(slice(xs, nx, "xs")?, slice(ys, ny, "ys")?))?;
        write_out(out, v, "out")
    })
}

/// Creates a sampler for fBm on the grid `{k/n : k = 0..n}`.
///
/// # Safety
/// `out` must be writable; the handle it receives is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn sr_fbm_sampler_new(n: usize, hurst: f64, out: *mut *mut SrFbmSampler) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = lib(Hurst::new(hurst))?;
        let grid = lib(TimeGrid::uniform(n, 1.0))?;
        let inner = lib(FbmSampler::new(grid, h))?;
        out.write(Box::into_raw(Box::new(SrFbmSampler { inner })));
        Ok(())
    })
}

/// Number of grid points (`n + 1`) of a sampler.
///
/// # Safety
/// `sampler` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn sr_fbm_sampler_len(sampler: *const SrFbmSampler) -> usize {
    sampler.as_ref().map_or(0, |s| s.inner.grid().len())
}

/// Writes path `replica` of stream `seed` into `values` (`len` must equal
/// [`sr_fbm_sampler_len`]). Identical arguments always give identical paths.
///
/// # Safety
/// `sampler` must be a live handle and `values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_fbm_sampler_sample(
    sampler: *const SrFbmSampler,
    seed: u64,
    replica: u64,
    values: *mut f64,
    len: usize,
) -> SrStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or_else(|| null("sampler"))?;
        if values.is_null() {
            return Err(null("values"));
        }
        let expected = s.inner.grid().len();
        if len != expected {
            return Err((SrStatus::BufferTooSmall, format!("values holds {len} doubles, the grid has {expected} points")));
        }
        let path = s.inner.sample(seed, replica);
        ptr::copy_nonoverlapping(path.values.as_ptr(), values, len);
        Ok(())
    })
}

/// Releases a sampler. Null is ignored.
///
/// # Safety
/// `sampler` must come from [`sr_fbm_sampler_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sr_fbm_sampler_free(sampler: *mut SrFbmSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Runs an experiment described by a JSON configuration (same keys as the
/// command-line config file; `experiment` is required).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_experiment(config_json: *const c_char, out: *mut *mut SrReport) -> SrStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| (SrStatus::InvalidUtf8, format!("config_json: {e}")))?;
        let patch = lib(ConfigPatch::from_json(text))?;
        let cfg = lib(ExperimentConfig::resolve(None, patch))?;
        let inner = lib(experiments::run(&cfg))?;
        out.write(Box::into_raw(Box::new(SrReport { inner })));
        Ok(())
    })
}

/// Copies one CSV table of `report` into `buf` (NUL-terminated). Call with a
/// null `buf` to learn the size through `required`.
///
/// # Safety
/// `report` must be a live handle; `buf` must point to `len` writable bytes
/// or be null; `required` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sr_report_csv(
    report: *const SrReport,
    table: SrTable,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> SrStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let text = lib(match table {
            SrTable::Distances => r.inner.distances_csv(),
            SrTable::Bounds => r.inner.bounds_csv(),
            SrTable::Rates => r.inner.rates_csv(),
        })?;
        copy_string(&text, buf, len, required)
    })
}

/// 1 if every check in the report passed, 0 otherwise or for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_report_all_pass(report: *const SrReport) -> i32 {
    report.as_ref().map_or(0, |r| r.inner.all_pass() as i32)
}

/// 1 if the run stopped early on its time budget.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_report_truncated(report: *const SrReport) -> i32 {
    report.as_ref().map_or(0, |r| r.inner.truncated as i32)
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from [`sr_run_experiment`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sr_report_free(report: *mut SrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
