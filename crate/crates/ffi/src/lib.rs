//! C ABI for the voicescreen library: load or synthesize phonations and
//! extract the 307 dysphonia measures through opaque handles and status
//! codes. All functions are panic-safe; the last error message is kept in
//! thread-local storage.
//!
//! The generated header lands in `include/voicescreen.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, c_uint, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use voicescreen::audio::Sex;
use voicescreen::error::Error;
use voicescreen::features::{extract_features, feature_names, FeatureConfig, N_FEATURES};
use voicescreen::synth::SynthSpec;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VsStatus {
    VsOk = 0,
    VsNullArgument = 1,
    VsInvalidArgument = 2,
    VsDataError = 3,
    VsNumericalError = 4,
    VsUtf8Error = 5,
    VsIoError = 6,
    VsPanic = 7,
}

/// Opaque recording handle.
pub struct VsRecording {
    inner: voicescreen::Recording,
}

/// Synthesis parameters mirrored for C callers.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VsSynthParams {
    /// Mean fundamental frequency in Hz (70-400).
    pub f0: c_double,
    /// Duration in seconds.
    pub duration_s: c_double,
    /// Output sample rate in Hz (use 8000).
    pub sample_rate: c_uint,
    /// Per-cycle period perturbation in percent.
    pub jitter_pct: c_double,
    /// Per-cycle amplitude perturbation in percent.
    pub shimmer_pct: c_double,
    /// Target harmonics-to-noise ratio in dB.
    pub hnr_db: c_double,
    /// Linear F0 drift in Hz/s.
    pub f0_drift: c_double,
    /// Random seed; equal seeds give identical waveforms.
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> VsStatus {
    match err {
        Error::Io(_) => VsStatus::VsIoError,
        Error::Convergence { .. }
        | Error::DegenerateTraining
        | Error::DegenerateSignal(_)
        | Error::UndefinedMetric(_)
        | Error::UndefinedCorrelation => VsStatus::VsNumericalError,
        Error::InvalidInput(_) | Error::InvalidSpec(_) | Error::Config(_) | Error::Bounds(_) => {
            VsStatus::VsInvalidArgument
        }
        _ => VsStatus::VsDataError,
    }
}

fn guard(f: impl FnOnce() -> VsStatus) -> VsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            VsStatus::VsPanic
        }
    }
}

/// Message of the most recent error on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.as_ptr(),
        None => std::ptr::null(),
    })
}

/// Number of features in the extraction vector (307).
#[no_mangle]
pub extern "C" fn vs_feature_count() -> usize {
    N_FEATURES
}

/// Canonical name of feature `index`, or NULL when out of range. The
/// returned pointer is static.
#[no_mangle]
pub extern "C" fn vs_feature_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| {
        feature_names()
            .iter()
            .map(|n| CString::new(n.as_str()).unwrap())
            .collect()
    });
    match names.get(index) {
        Some(c) => c.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Load a mono 16-bit PCM WAV file into a new recording handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_recording_load_wav(
    path: *const c_char,
    out: *mut *mut VsRecording,
) -> VsStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            set_error("null argument".into());
            return VsStatus::VsNullArgument;
        }
        let path_str = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8".into());
                return VsStatus::VsUtf8Error;
            }
        };
        match voicescreen::load_wav(path_str) {
            Ok(rec) => {
                unsafe { *out = Box::into_raw(Box::new(VsRecording { inner: rec })) };
                VsStatus::VsOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Create a recording handle from raw samples (amplitude in [-1, 1]).
///
/// # Safety
/// `samples` must point to `len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_recording_from_samples(
    samples: *const c_double,
    len: usize,
    sample_rate: c_uint,
    out: *mut *mut VsRecording,
) -> VsStatus {
    guard(|| {
        if samples.is_null() || out.is_null() {
            set_error("null argument".into());
            return VsStatus::VsNullArgument;
        }
        let data = unsafe { std::slice::from_raw_parts(samples, len) }.to_vec();
        match voicescreen::Recording::new("ffi", data, sample_rate) {
            Ok(rec) => {
                unsafe { *out = Box::into_raw(Box::new(VsRecording { inner: rec })) };
                VsStatus::VsOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Synthesize a phonation into a new recording handle.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn vs_synthesize(
    params: *const VsSynthParams,
    out: *mut *mut VsRecording,
) -> VsStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            set_error("null argument".into());
            return VsStatus::VsNullArgument;
        }
        let p = unsafe { *params };
        let spec = SynthSpec {
            f0: p.f0,
            duration: p.duration_s,
            sample_rate: p.sample_rate,
            jitter_pct: p.jitter_pct,
            shimmer_pct: p.shimmer_pct,
            hnr_db: p.hnr_db,
            f0_drift: p.f0_drift,
            seed: p.seed,
        };
        match voicescreen::synthesize(&spec) {
            Ok(rec) => {
                unsafe { *out = Box::into_raw(Box::new(VsRecording { inner: rec })) };
                VsStatus::VsOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Duration of a recording in seconds; 0 for NULL.
///
/// # Safety
/// `rec` must be a handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn vs_recording_duration(rec: *const VsRecording) -> c_double {
    if rec.is_null() {
        return 0.0;
    }
    unsafe { &*rec }.inner.duration()
}

/// Sample rate of a recording in Hz; 0 for NULL.
///
/// # Safety
/// `rec` must be a handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn vs_recording_sample_rate(rec: *const VsRecording) -> c_uint {
    if rec.is_null() {
        return 0;
    }
    unsafe { &*rec }.inner.sample_rate
}

/// Extract the 307 dysphonia measures of a recording.
///
/// `sex`: 0 unknown, 1 female, 2 male. `age`: years, or <= 0 for unknown.
/// `values_out` must hold `vs_feature_count()` doubles. `flags_out` may be
/// NULL; when given it must hold `vs_feature_count()` bytes and receives 1
/// where a value failed to compute (the value is NaN there).
///
/// # Safety
/// Pointers must satisfy the length contracts above.
#[no_mangle]
pub unsafe extern "C" fn vs_extract_features(
    rec: *const VsRecording,
    sex: c_int,
    age: c_int,
    values_out: *mut c_double,
    flags_out: *mut u8,
) -> VsStatus {
    guard(|| {
        if rec.is_null() || values_out.is_null() {
            set_error("null argument".into());
            return VsStatus::VsNullArgument;
        }
        let mut recording = unsafe { &*rec }.inner.clone();
        recording.sex = match sex {
            0 => Sex::Unknown,
            1 => Sex::F,
            2 => Sex::M,
            other => {
                set_error(format!("sex code {other} out of range"));
                return VsStatus::VsInvalidArgument;
            }
        };
        recording.age = if age > 0 { Some(age as u32) } else { None };
        match extract_features(&recording, &FeatureConfig::default()) {
            Ok(fv) => {
                let out = unsafe { std::slice::from_raw_parts_mut(values_out, N_FEATURES) };
                out.copy_from_slice(&fv.values);
                if !flags_out.is_null() {
                    let flags = unsafe { std::slice::from_raw_parts_mut(flags_out, N_FEATURES) };
                    for (f, &b) in flags.iter_mut().zip(&fv.flags) {
                        *f = b as u8;
                    }
                }
                VsStatus::VsOk
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Free a recording handle. NULL is a no-op.
///
/// # Safety
/// `rec` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn vs_recording_free(rec: *mut VsRecording) {
    if !rec.is_null() {
        drop(unsafe { Box::from_raw(rec) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_census_through_c_abi() {
        assert_eq!(vs_feature_count(), 307);
        for i in 0..307 {
            assert!(!vs_feature_name(i).is_null(), "name {i} null");
        }
        assert!(vs_feature_name(307).is_null());

        let params = VsSynthParams {
            f0: 130.0,
            duration_s: 3.0,
            sample_rate: 8000,
            jitter_pct: 1.0,
            shimmer_pct: 3.0,
            hnr_db: 18.0,
            f0_drift: 0.0,
            seed: 21,
        };
        let mut rec: *mut VsRecording = std::ptr::null_mut();
        let st = unsafe { vs_synthesize(&params, &mut rec) };
        assert_eq!(st, VsStatus::VsOk);
        assert!((unsafe { vs_recording_duration(rec) } - 3.0).abs() < 1e-9);
        assert_eq!(unsafe { vs_recording_sample_rate(rec) }, 8000);

        let mut values = vec![0.0f64; 307];
        let mut flags = vec![0u8; 307];
        let st = unsafe {
            vs_extract_features(rec, 2, 64, values.as_mut_ptr(), flags.as_mut_ptr())
        };
        assert_eq!(st, VsStatus::VsOk);
        for (i, (&v, &f)) in values.iter().zip(&flags).enumerate() {
            assert!(v.is_finite() || f == 1, "feature {i}: {v} unflagged");
        }
        unsafe { vs_recording_free(rec) };
    }

    #[test]
    fn null_arguments_reported() {
        let mut rec: *mut VsRecording = std::ptr::null_mut();
        let st = unsafe { vs_recording_load_wav(std::ptr::null(), &mut rec) };
        assert_eq!(st, VsStatus::VsNullArgument);
        assert!(!vs_last_error_message().is_null());

        let st = unsafe {
            vs_extract_features(std::ptr::null(), 0, 0, std::ptr::null_mut(), std::ptr::null_mut())
        };
        assert_eq!(st, VsStatus::VsNullArgument);
    }

    #[test]
    fn invalid_spec_is_invalid_argument() {
        let params = VsSynthParams {
            f0: 900.0, // out of range
            duration_s: 1.0,
            sample_rate: 8000,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            hnr_db: 25.0,
            f0_drift: 0.0,
            seed: 0,
        };
        let mut rec: *mut VsRecording = std::ptr::null_mut();
        let st = unsafe { vs_synthesize(&params, &mut rec) };
        assert_eq!(st, VsStatus::VsInvalidArgument);
        let msg = unsafe { CStr::from_ptr(vs_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("f0"));
    }

    #[test]
    fn samples_roundtrip_and_free() {
        let samples: Vec<f64> = (0..16000)
            .map(|i| 0.4 * (2.0 * std::f64::consts::PI * 150.0 * i as f64 / 8000.0).sin())
            .collect();
        let mut rec: *mut VsRecording = std::ptr::null_mut();
        let st = unsafe {
            vs_recording_from_samples(samples.as_ptr(), samples.len(), 8000, &mut rec)
        };
        assert_eq!(st, VsStatus::VsOk);
        assert!((unsafe { vs_recording_duration(rec) } - 2.0).abs() < 1e-9);
        unsafe { vs_recording_free(rec) };
        unsafe { vs_recording_free(std::ptr::null_mut()) }; // no-op
    }
}
