//! C ABI over `hps_core`.
//!
//! Objects cross the boundary as opaque pointers that the caller releases
//! with the matching `*_free` function. Every fallible call returns an
//! [`HpsStatus`]; on failure, [`hps_last_error_message`] describes the error
//! for the calling thread. Strings returned through out-parameters are owned
//! by the caller and must be released with [`hps_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hps_core::case::{CaseDescription, CaseJson};
use hps_core::harness::{encode_sample, ExperimentConfig, Model};
use hps_core::raster::GrayImage;
use hps_core::sme::{similarity, Side, SmeParams};
use hps_core::HpsError;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpsStatus {
    Ok = 0,
    InvalidArgument = 1,
    DataFormat = 2,
    Internal = 3,
    NoClassification = 4,
}

/// Opaque case description.
pub struct HpsCase(CaseDescription);

/// Opaque set of trained pools together with the encoding settings used to
/// classify against them.
pub struct HpsPools {
    model: Model,
    config: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &HpsError) -> HpsStatus {
    match e {
        HpsError::InvalidInput(_) | HpsError::Config(_) => HpsStatus::InvalidArgument,
        HpsError::NoClassification(_) => HpsStatus::NoClassification,
        HpsError::Invariant(_) => HpsStatus::Internal,
        HpsError::Format { .. } | HpsError::Data(_) | HpsError::Io { .. } | HpsError::Json(_) => {
            HpsStatus::DataFormat
        }
    }
}

/// Runs `f`, recording errors and converting panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), HpsError>) -> HpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HpsStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            HpsStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HpsError> {
    if p.is_null() {
        return Err(HpsError::invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| HpsError::invalid(format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, HpsError> {
    p.as_mut().ok_or_else(|| HpsError::invalid(format!("{what} is null")))
}

unsafe fn gray_arg(pixels: *const u8, width: usize, height: usize) -> Result<GrayImage, HpsError> {
    if pixels.is_null() {
        return Err(HpsError::invalid("pixels is null"));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| HpsError::invalid("image size overflows"))?;
    GrayImage::new(width, height, std::slice::from_raw_parts(pixels, n).to_vec())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a case from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hps_case_from_json(json: *const c_char, out: *mut *mut HpsCase) -> HpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let parsed: CaseJson = serde_json::from_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(HpsCase(CaseDescription::from_json(&parsed)?)));
        Ok(())
    })
}

/// Serializes a case to JSON; free the result with `hps_string_free`.
///
/// # Safety
/// `handle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hps_case_to_json(handle: *const HpsCase, out: *mut *mut c_char) -> HpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let case = handle.as_ref().ok_or_else(|| HpsError::invalid("case is null"))?;
        *out = c_string(serde_json::to_string(&case.0.to_json())?);
        Ok(())
    })
}

/// Number of asserted facts in a case, or 0 for null.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hps_case_fact_count(handle: *const HpsCase) -> usize {
    handle.as_ref().map_or(0, |c| c.0.facts().len())
}

/// # Safety
/// `handle` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hps_case_free(handle: *mut HpsCase) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Normalized structure-mapping similarity of two cases, in [0, 1].
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hps_match_score(base: *const HpsCase, target: *const HpsCase, out: *mut f64) -> HpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let b = base.as_ref().ok_or_else(|| HpsError::invalid("base is null"))?;
        let t = target.as_ref().ok_or_else(|| HpsError::invalid("target is null"))?;
        *out = similarity(Side::plain(&b.0), Side::plain(&t.0), &SmeParams::default());
        Ok(())
    })
}

/// Encodes a row-major 8-bit grayscale image (bright ink on dark) into a
/// shape case with default settings.
///
/// # Safety
/// `pixels` must point to `width * height` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hps_encode_gray(
    pixels: *const u8,
    width: usize,
    height: usize,
    out: *mut *mut HpsCase,
) -> HpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let img = gray_arg(pixels, width, height)?;
        let cfg = ExperimentConfig::default();
        let enc = encode_sample(&img, &cfg, "ffi")?;
        *out = Box::into_raw(Box::new(HpsCase(enc.top().clone())));
        Ok(())
    })
}

/// Loads a pool directory written by `hps train` or `hps eval`. `config` may
/// be null for default encoding settings, or name the experiment config the
/// pools were trained with.
///
/// # Safety
/// `dir` must be a NUL-terminated path; `config` null or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hps_pools_load_dir(
    dir: *const c_char,
    config: *const c_char,
    out: *mut *mut HpsPools,
) -> HpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let mut config = if config.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::load(Path::new(str_arg(config, "config")?))?
        };
        let model = Model::load_dir(Path::new(str_arg(dir, "dir")?), &config.sage)?;
        config.phal = matches!(model, Model::Phal(_));
        *out = Box::into_raw(Box::new(HpsPools { model, config }));
        Ok(())
    })
}

/// Classifies a grayscale image. On success `*label_out` receives the
/// concept label (free with `hps_string_free`).
///
/// # Safety
/// `pools` must be live; `pixels` must point to `width * height` bytes;
/// `label_out` writable.
#[no_mangle]
pub unsafe extern "C" fn hps_pools_classify(
    pools: *const HpsPools,
    pixels: *const u8,
    width: usize,
    height: usize,
    label_out: *mut *mut c_char,
) -> HpsStatus {
    guard(|| {
        let label_out = out_arg(label_out, "label_out")?;
        *label_out = ptr::null_mut();
        let pools = pools.as_ref().ok_or_else(|| HpsError::invalid("pools is null"))?;
        let img = gray_arg(pixels, width, height)?;
        let item = encode_sample(&img, &pools.config, "ffi")?;
        let (label, _) = pools.model.classify(&item, &pools.config)?;
        *label_out = c_string(label);
        Ok(())
    })
}

/// # Safety
/// `pools` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hps_pools_free(pools: *mut HpsPools) {
    if !pools.is_null() {
        drop(Box::from_raw(pools));
    }
}
