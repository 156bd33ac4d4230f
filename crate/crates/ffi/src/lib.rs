//! C ABI for the momentldp library: opaque run handles created from the same
//! JSON configuration the CLI consumes, plus rate evaluation, moment-map
//! queries, and exact/Monte Carlo outcome-region masses.
//!
//! Every function returns an `MldpStatus` code; details for the most recent
//! error on the calling thread are available via `mldp_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use momentldp::config::{self, RunConfig};
use momentldp::moment;
use momentldp::rate::Certificate;
use momentldp::sim;

/// Status codes returned by every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MldpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    ComputeFailed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Certificate attached to a rate value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MldpCertificate {
    /// Gradient converged below tolerance; the value is a finite supremum.
    Converged = 0,
    /// The point is certifiably outside the weight polytope; the rate is +inf.
    Diverged = 1,
    /// Evaluated by an exact closed form.
    ClosedForm = 2,
}

/// Opaque handle wrapping a parsed run configuration.
pub struct MldpRun {
    cfg: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, MldpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(MldpStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        MldpStatus::InvalidUtf8
    })
}

fn guard<F: FnOnce() -> MldpStatus>(f: F) -> MldpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            MldpStatus::Panic
        }
    }
}

/// Copy the message for the most recent error on this thread into `buf`
/// (NUL-terminated, truncated to `cap` bytes). Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be NULL (query mode).
#[no_mangle]
pub unsafe extern "C" fn mldp_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mldp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a JSON run configuration into a new handle. Returns NULL on error
/// (see `mldp_last_error`).
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mldp_run_new(json: *const c_char) -> *mut MldpRun {
    let text = match read_str(json) {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    match RunConfig::from_json(text) {
        Ok(cfg) => {
            // validate eagerly so later calls cannot fail on config shape
            if let Err(e) = cfg.state() {
                set_error(e.to_string());
                return std::ptr::null_mut();
            }
            Box::into_raw(Box::new(MldpRun { cfg }))
        }
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Free a handle returned by `mldp_run_new`. NULL is a no-op.
///
/// # Safety
/// `run` must be NULL or a pointer obtained from `mldp_run_new` that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn mldp_run_free(run: *mut MldpRun) {
    if !run.is_null() {
        drop(unsafe { Box::from_raw(run) });
    }
}

unsafe fn borrow_run<'a>(run: *const MldpRun) -> Result<&'a MldpRun, MldpStatus> {
    if run.is_null() {
        set_error("null run handle");
        return Err(MldpStatus::NullPointer);
    }
    Ok(unsafe { &*run })
}

/// Evaluate the configured rate function.
///
/// `method` is one of "numeric", "an", "keyl", "cramer", "mixed",
/// "contracted", "bipartite". `out_value` receives the rate (may be +inf) and
/// `out_certificate` the certificate kind; either may be NULL to skip.
///
/// # Safety
/// `run` must be a live handle; `method` a NUL-terminated string; the out
/// pointers NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mldp_rate(
    run: *const MldpRun,
    method: *const c_char,
    out_value: *mut f64,
    out_certificate: *mut MldpCertificate,
) -> MldpStatus {
    guard(|| {
        let run = match unsafe { borrow_run(run) } {
            Ok(r) => r,
            Err(s) => return s,
        };
        let method: config::RateMethod = match read_str(method).map(str::parse) {
            Ok(Ok(m)) => m,
            Ok(Err(e)) => {
                set_error(e.to_string());
                return MldpStatus::InvalidConfig;
            }
            Err(s) => return s,
        };
        match config::evaluate_rate(&run.cfg, method, run.cfg.seed) {
            Ok(r) => {
                if !out_value.is_null() {
                    unsafe { *out_value = r.value };
                }
                if !out_certificate.is_null() {
                    let c = match r.certificate {
                        Certificate::Converged { .. } => MldpCertificate::Converged,
                        Certificate::Diverged { .. } => MldpCertificate::Diverged,
                        Certificate::ClosedForm => MldpCertificate::ClosedForm,
                    };
                    unsafe { *out_certificate = c };
                }
                MldpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                MldpStatus::ComputeFailed
            }
        }
    })
}

/// Chamber coordinates of the moment-map value J(rho) of the configured state.
///
/// Writes up to `cap` coordinates into `out`; `out_len` receives the full
/// coordinate count. Returns `BufferTooSmall` when `cap` is insufficient
/// (after filling `out_len`).
///
/// # Safety
/// `run` must be a live handle; `out` must point to `cap` writable doubles;
/// `out_len` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mldp_moment_map_chamber(
    run: *const MldpRun,
    out: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> MldpStatus {
    guard(|| {
        let run = match unsafe { borrow_run(run) } {
            Ok(r) => r,
            Err(s) => return s,
        };
        let result = (|| -> momentldp::Result<Vec<f64>> {
            let spec = run.cfg.group_spec()?;
            let rep = run.cfg.representation()?;
            let rho = run.cfg.state()?;
            let j = moment::moment_map(&rep, &spec, &rho)?;
            let cd = moment::chamber_decompose(&j);
            Ok(cd.x0.coords().iter().cloned().collect())
        })();
        match result {
            Ok(coords) => {
                if !out_len.is_null() {
                    unsafe { *out_len = coords.len() };
                }
                if cap < coords.len() {
                    set_error(format!("buffer holds {cap} doubles, need {}", coords.len()));
                    return MldpStatus::BufferTooSmall;
                }
                if out.is_null() {
                    set_error("null output buffer");
                    return MldpStatus::NullPointer;
                }
                unsafe { std::ptr::copy_nonoverlapping(coords.as_ptr(), out, coords.len()) };
                MldpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                MldpStatus::ComputeFailed
            }
        }
    })
}

/// Outcome mass of a region under the m-copy covariant measurement.
///
/// `region` uses the CLI grammar (`halfspace:...`, `chamberball:...`,
/// `ball:<radius>` around J(rho), `complement:` prefix). When the region is
/// decidable from block data the mass is summed exactly and the interval
/// collapses; otherwise `n_samples` Monte Carlo draws produce a Wilson 95%
/// interval. `out_exact` reports which path ran (1 exact, 0 sampled).
///
/// # Safety
/// `run` must be a live handle; `region` a NUL-terminated string; the out
/// pointers NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mldp_region_mass(
    run: *const MldpRun,
    m: usize,
    region: *const c_char,
    n_samples: usize,
    out_mass: *mut f64,
    out_ci_lo: *mut f64,
    out_ci_hi: *mut f64,
    out_exact: *mut i32,
) -> MldpStatus {
    guard(|| {
        let run = match unsafe { borrow_run(run) } {
            Ok(r) => r,
            Err(s) => return s,
        };
        let region_text = match read_str(region) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let result = (|| -> momentldp::Result<(f64, f64, f64, bool)> {
            let spec = run.cfg.group_spec()?;
            let rep = run.cfg.representation()?;
            let rho = run.cfg.state()?;
            let center = moment::moment_map(&rep, &spec, &rho)?;
            let region = config::parse_region(region_text, Some(&center))?;
            let ctx = sim::sim_context(&rep, &spec, &rho, m)?;
            match sim::mu_exact(&ctx, &region) {
                Some(v) => Ok((v, v, v, true)),
                None => {
                    let est = sim::estimate_mu(&ctx, &region, n_samples, run.cfg.seed, run.cfg.workers.max(1))?;
                    Ok((est.p_hat, est.ci.0, est.ci.1, false))
                }
            }
        })();
        match result {
            Ok((mass, lo, hi, exact)) => {
                unsafe {
                    if !out_mass.is_null() {
                        *out_mass = mass;
                    }
                    if !out_ci_lo.is_null() {
                        *out_ci_lo = lo;
                    }
                    if !out_ci_hi.is_null() {
                        *out_ci_hi = hi;
                    }
                    if !out_exact.is_null() {
                        *out_exact = i32::from(exact);
                    }
                }
                MldpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                MldpStatus::ComputeFailed
            }
        }
    })
}

/// Infimum of the rate function over a region (the decay exponent of the
/// region's outcome mass). Supports chamber-decidable regions and dual-space
/// balls containing J(rho).
///
/// # Safety
/// Same contracts as `mldp_region_mass`.
#[no_mangle]
pub unsafe extern "C" fn mldp_region_inf_rate(
    run: *const MldpRun,
    region: *const c_char,
    out_inf_rate: *mut f64,
) -> MldpStatus {
    guard(|| {
        let run = match unsafe { borrow_run(run) } {
            Ok(r) => r,
            Err(s) => return s,
        };
        let region_text = match read_str(region) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let result = (|| -> momentldp::Result<f64> {
            let spec = run.cfg.group_spec()?;
            let rep = run.cfg.representation()?;
            let rho = run.cfg.state()?;
            let center = moment::moment_map(&rep, &spec, &rho)?;
            let region = config::parse_region(region_text, Some(&center))?;
            let opts = run.cfg.optimizer.build(run.cfg.seed);
            sim::inf_rate_over_region(&rep, &spec, &rho, &region, &opts)
        })();
        match result {
            Ok(v) => {
                if !out_inf_rate.is_null() {
                    unsafe { *out_inf_rate = v };
                }
                MldpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                MldpStatus::ComputeFailed
            }
        }
    })
}
