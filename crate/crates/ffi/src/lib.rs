//! C interface to motion-risk. Handles are opaque and owned by the caller
//! until passed to the matching `*_free`. Strings returned by the library
//! must be released with [`mr_string_free`]. Every function that can fail
//! returns an [`MrStatus`] and records a message retrievable with
//! [`mr_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use motion_risk::kinematics::forward_kinematics;
use motion_risk::motion::{parse_motion, MotionFormat, DEFAULT_SCALE};
use motion_risk::pipeline::{Analysis, Assets, Settings};
use motion_risk::risk::RuleSet;
use motion_risk::Motion;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    OutOfRange = 5,
    InvalidRules = 6,
    AnalysisFailed = 7,
    Panic = 8,
}

/// Parsed skeleton and pose sequence.
pub struct MrMotion {
    motion: Motion,
}

/// Completed analysis with its rendered report.
pub struct MrAnalysis {
    analysis: Analysis,
    report_json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn guard(f: impl FnOnce() -> Result<(), (MrStatus, String)>) -> MrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MrStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (MrStatus, String)> {
    if p.is_null() {
        return Err((MrStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (MrStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn to_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a
/// success. Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse mocap text or a pose interchange document (detected from the
/// content). `scale` is meters per mocap unit; pass 0 for the default.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mr_motion_parse(text: *const c_char, scale: f64, out: *mut *mut MrMotion) -> MrStatus {
    guard(|| {
        if out.is_null() {
            return Err((MrStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let scale = if scale == 0.0 { DEFAULT_SCALE } else { scale };
        let motion =
            parse_motion(text, MotionFormat::detect(text), scale).map_err(|e| (MrStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(MrMotion { motion }));
        Ok(())
    })
}

/// # Safety
/// `motion` must come from [`mr_motion_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mr_motion_free(motion: *mut MrMotion) {
    if !motion.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(motion))));
    }
}

/// # Safety
/// `motion` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_motion_joint_count(motion: *const MrMotion) -> usize {
    motion.as_ref().map_or(0, |m| m.motion.skeleton.len())
}

/// # Safety
/// `motion` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_motion_frame_count(motion: *const MrMotion) -> usize {
    motion.as_ref().map_or(0, |m| m.motion.sequence.len())
}

/// Frame rate in Hz, or 0 for a null handle.
///
/// # Safety
/// `motion` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_motion_frame_rate(motion: *const MrMotion) -> f64 {
    motion.as_ref().map_or(0.0, |m| m.motion.sequence.frame_rate())
}

/// World joint positions (meters) of one frame, written as `x y z`
/// triples in joint order. `out_len` is the capacity in doubles and must
/// be at least `3 * joint_count`.
///
/// # Safety
/// `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mr_motion_joint_positions(
    motion: *const MrMotion,
    frame: usize,
    out: *mut f64,
    out_len: usize,
) -> MrStatus {
    guard(|| {
        let m = motion
            .as_ref()
            .ok_or((MrStatus::NullArgument, "motion is null".to_owned()))?;
        if out.is_null() {
            return Err((MrStatus::NullArgument, "out is null".into()));
        }
        let frames = m.motion.sequence.frames();
        let f = frames.get(frame).ok_or_else(|| {
            (
                MrStatus::OutOfRange,
                format!("frame {frame} outside [0, {})", frames.len()),
            )
        })?;
        let need = 3 * m.motion.skeleton.len();
        if out_len < need {
            return Err((
                MrStatus::InvalidArgument,
                format!("buffer holds {out_len} doubles, {need} needed"),
            ));
        }
        let pose = forward_kinematics(&m.motion.skeleton, f).map_err(|e| (MrStatus::AnalysisFailed, e.to_string()))?;
        let dst = std::slice::from_raw_parts_mut(out, need);
        for (chunk, p) in dst.chunks_exact_mut(3).zip(&pose.positions) {
            chunk.copy_from_slice(&[p.x, p.y, p.z]);
        }
        Ok(())
    })
}

/// Run the full pipeline with the shipped tables. `rules_json` may be
/// null to use the shipped rule set.
///
/// # Safety
/// `motion` must be a live handle, `rules_json` null or NUL-terminated,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mr_analyze(
    motion: *const MrMotion,
    body_mass_kg: f64,
    rules_json: *const c_char,
    out: *mut *mut MrAnalysis,
) -> MrStatus {
    guard(|| {
        if out.is_null() {
            return Err((MrStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let m = motion
            .as_ref()
            .ok_or((MrStatus::NullArgument, "motion is null".to_owned()))?;
        if !(body_mass_kg.is_finite() && body_mass_kg > 0.0) {
            return Err((
                MrStatus::InvalidArgument,
                format!("body mass must be positive, got {body_mass_kg}"),
            ));
        }
        let mut assets = Assets::default();
        if !rules_json.is_null() {
            let text = str_arg(rules_json, "rules_json")?;
            assets.rules = RuleSet::from_json(text).map_err(|e| (MrStatus::InvalidRules, e.to_string()))?;
        }
        let settings = Settings {
            body_mass_kg,
            ..Settings::default()
        };
        let analysis = Analysis::run("motion", m.motion.clone(), &assets, &settings)
            .map_err(|e| (MrStatus::AnalysisFailed, e.to_string()))?;
        let report_json = CString::new(analysis.report.to_json()).expect("report has no NUL");
        *out = Box::into_raw(Box::new(MrAnalysis { analysis, report_json }));
        Ok(())
    })
}

/// # Safety
/// `analysis` must come from [`mr_analyze`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mr_analysis_free(analysis: *mut MrAnalysis) {
    if !analysis.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(analysis))));
    }
}

/// # Safety
/// `analysis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_analysis_incident_count(analysis: *const MrAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.analysis.report.incidents.len())
}

/// Report document. Borrowed from the handle; do not free.
///
/// # Safety
/// `analysis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_analysis_report_json(analysis: *const MrAnalysis) -> *const c_char {
    analysis.as_ref().map_or(ptr::null(), |a| a.report_json.as_ptr())
}

/// Stream table as CSV. Caller frees with [`mr_string_free`].
///
/// # Safety
/// `analysis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_analysis_streams_csv(analysis: *const MrAnalysis) -> *mut c_char {
    match analysis.as_ref() {
        None => {
            set_error("analysis is null");
            ptr::null_mut()
        }
        Some(a) => to_c_string(&motion_risk::report::streams_csv(a.analysis.streams())),
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
