//! C ABI over `iaqc-core`.
//!
//! Every fallible function returns an [`IaqcStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`iaqc_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use iaqc_core::analysis::{detection_probability, detector_bank_budget, min_photons_info_bound, siphon_budget, Budget};
use iaqc_core::cli::{table1, ExperimentConfig};
use iaqc_core::protocol::run_session;
use iaqc_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IaqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Parse = 3,
    Panic = 4,
}

/// Opaque experiment configuration: session settings plus the round template.
pub struct IaqcConfig {
    inner: ExperimentConfig,
}

/// Session statistics. Eve's rates are NaN when no round had an active Eve.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IaqcStats {
    pub rounds: u64,
    pub detection_rate: f64,
    pub intensity_alarm_rate: f64,
    pub alignment_alarm_rate: f64,
    pub bit_error_rate_undetected: f64,
    pub undetermined_rate: f64,
    pub eve_accuracy: f64,
    pub eve_reconstruction_rate: f64,
    pub mean_final_intensity: f64,
    /// 95% halfwidth of `detection_rate`.
    pub detection_rate_halfwidth: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IaqcBudget {
    pub eve_photons: u64,
    pub safe_source_intensity: u64,
}

impl From<Budget> for IaqcBudget {
    fn from(b: Budget) -> Self {
        IaqcBudget {
            eve_photons: b.eve_photons,
            safe_source_intensity: b.safe_source_intensity,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(IaqcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) => IaqcStatus::Parse,
            _ => IaqcStatus::InvalidParameter,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(IaqcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IaqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IaqcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            IaqcStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(IaqcStatus::Parse, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn config_ref<'a>(cfg: *const IaqcConfig) -> Result<&'a ExperimentConfig, Failure> {
    cfg.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior NULs removed")
        .into_raw()
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn iaqc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iaqc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A new configuration with default settings. Free with [`iaqc_config_free`].
#[no_mangle]
pub extern "C" fn iaqc_config_default() -> *mut IaqcConfig {
    Box::into_raw(Box::new(IaqcConfig {
        inner: ExperimentConfig::default(),
    }))
}

/// Parses a TOML configuration (`[session]` and `[round]` sections).
///
/// # Safety
/// `toml` must be NULL or a NUL-terminated string; `out` must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_config_from_toml(toml: *const c_char, out: *mut *mut IaqcConfig) -> IaqcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let inner = ExperimentConfig::from_toml(read_str(toml, "toml")?)?;
        write_out(out, Box::into_raw(Box::new(IaqcConfig { inner })))
    })
}

/// Applies one `key=value` override, e.g. `round.tap_fraction=0.05`. The
/// configuration is left unchanged on failure.
///
/// # Safety
/// `cfg` must come from this library; `assignment` must be NULL or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn iaqc_config_set(cfg: *mut IaqcConfig, assignment: *const c_char) -> IaqcStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let assignment = read_str(assignment, "assignment")?.to_string();
        let text = cfg.inner.to_toml()?;
        cfg.inner = ExperimentConfig::from_toml_with(&text, &[assignment])?;
        Ok(())
    })
}

/// Serializes the configuration to TOML. Free the string with
/// [`iaqc_string_free`].
///
/// # Safety
/// `cfg` must come from this library; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_config_to_toml(cfg: *const IaqcConfig, out: *mut *mut c_char) -> IaqcStatus {
    guard(|| {
        let text = config_ref(cfg)?.to_toml()?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        write_out(out, into_c_string(text))
    })
}

/// # Safety
/// `cfg` must be NULL or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iaqc_config_free(cfg: *mut IaqcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs a full session with master `seed`.
///
/// # Safety
/// `cfg` must come from this library; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_run_session(cfg: *const IaqcConfig, seed: u64, out: *mut IaqcStats) -> IaqcStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let s = run_session(&c.round, &c.session, seed)?;
        write_out(
            out,
            IaqcStats {
                rounds: s.rounds as u64,
                detection_rate: s.detection_rate,
                intensity_alarm_rate: s.intensity_alarm_rate,
                alignment_alarm_rate: s.alignment_alarm_rate,
                bit_error_rate_undetected: s.bit_error_rate_undetected,
                undetermined_rate: s.undetermined_rate,
                eve_accuracy: s.eve_accuracy.unwrap_or(f64::NAN),
                eve_reconstruction_rate: s.eve_reconstruction_rate.unwrap_or(f64::NAN),
                mean_final_intensity: s.mean_final_intensity,
                detection_rate_halfwidth: s.halfwidths.detection_rate,
            },
        )
    })
}

/// Monte Carlo detection probability of the configured round over `trials`
/// seeded trials (at least 100), with its 95% halfwidth.
///
/// # Safety
/// `cfg` must come from this library; the out-pointers must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_detection_probability(
    cfg: *const IaqcConfig,
    trials: u64,
    seed: u64,
    out_estimate: *mut f64,
    out_halfwidth: *mut f64,
) -> IaqcStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        if out_estimate.is_null() || out_halfwidth.is_null() {
            return Err(null("output pointer"));
        }
        let trials = usize::try_from(trials)
            .map_err(|_| Failure(IaqcStatus::InvalidParameter, format!("trials {trials} too large")))?;
        let est = detection_probability(&c.round, trials, seed)?;
        write_out(out_estimate, est.estimate)?;
        write_out(out_halfwidth, est.halfwidth)
    })
}

/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_min_photons_info_bound(s: u64, out: *mut u64) -> IaqcStatus {
    guard(|| write_out(out, min_photons_info_bound(s)?))
}

/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_detector_bank_budget(s: u64, out: *mut IaqcBudget) -> IaqcStatus {
    guard(|| write_out(out, detector_bank_budget(s)?.into()))
}

/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_siphon_budget(m: u64, out: *mut IaqcBudget) -> IaqcStatus {
    guard(|| write_out(out, siphon_budget(m)?.into()))
}

/// Renders the six-photon ledger for `seed`. Free the string with
/// [`iaqc_string_free`].
///
/// # Safety
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn iaqc_table1(seed: u64, no_eve: bool, out: *mut *mut c_char) -> IaqcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = table1(seed, no_eve)?;
        write_out(out, into_c_string(text))
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iaqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
