//! C ABI over the simulator.
//!
//! Every fallible call returns a [`RicsimStatus`] and writes results
//! through out-pointers. On failure `ricsim_last_error` holds a message
//! for the calling thread. Handles are opaque and owned by the caller
//! until passed to the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use ricsim::e2::{decode, encode, E2Message};
use ricsim::nn::{persist, NnError, RecurrentModel};
use ricsim::sim::{run, HoMode, RunError, RunOptions, RunOutput, Scenario};
use ricsim::stats::{anova, GroupSamples};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Model = 4,
    Codec = 5,
    Stats = 6,
    UnknownMetric = 7,
    Panic = 8,
}

/// A finished simulation run.
pub struct RicsimRun {
    output: RunOutput,
    aggregates_json: CString,
}

/// A trained recurrent forecaster.
pub struct RicsimModel(Arc<RecurrentModel>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

type Failure = (RicsimStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RicsimStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RicsimStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RicsimStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (RicsimStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (RicsimStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn run_failure(e: RunError) -> Failure {
    let status = match e {
        RunError::Model(_) => RicsimStatus::Model,
        _ => RicsimStatus::Config,
    };
    (status, e.to_string())
}

fn nn_failure(e: NnError) -> Failure {
    (RicsimStatus::Model, e.to_string())
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ricsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Runs a scenario given as JSON. `mode` is `default`, `oracle`, `lstm`
/// or `gru`; `model` may be null unless the mode needs one.
///
/// # Safety
/// `scenario_json` and `mode` must be NUL-terminated strings, `model` null
/// or a live model handle, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ricsim_run_scenario(
    scenario_json: *const c_char,
    mode: *const c_char,
    model: *const RicsimModel,
    out: *mut *mut RicsimRun,
) -> RicsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scenario = Scenario::from_json(text(scenario_json, "scenario_json")?)
            .map_err(|e| (RicsimStatus::Config, e))?;
        let mode: HoMode = text(mode, "mode")?.parse().map_err(|e: String| (RicsimStatus::Config, e))?;
        let model = model.as_ref().map(|m| m.0.clone());
        let output = run(&scenario, &RunOptions { mode, model }).map_err(run_failure)?;
        let aggregates_json = CString::new(output.metrics.aggregates_json()).expect("JSON has no NUL");
        *out = Box::into_raw(Box::new(RicsimRun { output, aggregates_json }));
        Ok(())
    })
}

/// Reads one aggregate by name, e.g. `mean_delay_ms` or `freeze_count`.
///
/// # Safety
/// `run` must be a live run handle, `name` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ricsim_run_metric(run: *const RicsimRun, name: *const c_char, out: *mut f64) -> RicsimStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let name = text(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = run
            .output
            .metrics
            .aggregates
            .value(name)
            .ok_or_else(|| (RicsimStatus::UnknownMetric, format!("no value for metric `{name}`")))?;
        *out = v;
        Ok(())
    })
}

/// Aggregates of the run as JSON. Owned by the run handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn ricsim_run_aggregates_json(run: *const RicsimRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.aggregates_json.as_ptr())
}

/// Number of executed handovers, 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn ricsim_run_handover_count(run: *const RicsimRun) -> u64 {
    run.as_ref().map_or(0, |r| r.output.handovers.len() as u64)
}

/// # Safety
/// `run` must be null or a handle from `ricsim_run_scenario` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ricsim_run_free(run: *mut RicsimRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Loads a model file written by `ricsim train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ricsim_model_load(path: *const c_char, out: *mut *mut RicsimModel) -> RicsimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = persist::load(Path::new(text(path, "path")?)).map_err(nn_failure)?;
        *out = Box::into_raw(Box::new(RicsimModel(Arc::new(model))));
        Ok(())
    })
}

/// Samples of history the model expects, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ricsim_model_lookback(model: *const RicsimModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.config().lookback)
}

/// One-step RSRP forecast (dBm) from the last `lookback` samples (dBm).
///
/// # Safety
/// `model` must be a live model handle, `window` point to `len` doubles
/// and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ricsim_model_predict(
    model: *const RicsimModel,
    window: *const f64,
    len: usize,
    out: *mut f64,
) -> RicsimStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let window = slice(window, len, "window")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = model.0.predict_dbm(window).map_err(nn_failure)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from `ricsim_model_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ricsim_model_free(model: *mut RicsimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Encodes an E2 message given as JSON into its wire bytes. Release the
/// buffer with `ricsim_bytes_free`.
///
/// # Safety
/// `message_json` must be a NUL-terminated string; `out_bytes` and
/// `out_len` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ricsim_e2_encode(
    message_json: *const c_char,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> RicsimStatus {
    guard(|| {
        if out_bytes.is_null() || out_len.is_null() {
            return Err(null("out"));
        }
        let msg: E2Message = serde_json::from_str(text(message_json, "message_json")?)
            .map_err(|e| (RicsimStatus::Codec, format!("message JSON: {e}")))?;
        let bytes = encode(&msg).map_err(|e| (RicsimStatus::Codec, e.to_string()))?.into_boxed_slice();
        *out_len = bytes.len();
        *out_bytes = Box::into_raw(bytes).cast::<u8>();
        Ok(())
    })
}

/// Decodes wire bytes into the JSON form of the message. Release the
/// string with `ricsim_string_free`.
///
/// # Safety
/// `bytes` must point to `len` bytes and `out_json` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ricsim_e2_decode(bytes: *const u8, len: usize, out_json: *mut *mut c_char) -> RicsimStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let msg = decode(slice(bytes, len, "bytes")?).map_err(|e| (RicsimStatus::Codec, e.to_string()))?;
        let json = serde_json::to_string(&msg).expect("message serializes");
        *out_json = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `bytes` and `len` must come from one `ricsim_e2_encode` call.
#[no_mangle]
pub unsafe extern "C" fn ricsim_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library as owned.
#[no_mangle]
pub unsafe extern "C" fn ricsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Two-group one-way ANOVA.
///
/// # Safety
/// `a` and `b` must point to `a_len` and `b_len` doubles; `out_f` and
/// `out_p` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ricsim_anova(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    out_f: *mut f64,
    out_p: *mut f64,
) -> RicsimStatus {
    guard(|| {
        if out_f.is_null() || out_p.is_null() {
            return Err(null("out"));
        }
        let groups = [
            GroupSamples::new("a", slice(a, a_len, "a")?.to_vec()),
            GroupSamples::new("b", slice(b, b_len, "b")?.to_vec()),
        ];
        let r = anova(&groups).map_err(|e| (RicsimStatus::Stats, e.to_string()))?;
        *out_f = r.f_value;
        *out_p = r.p_value;
        Ok(())
    })
}
