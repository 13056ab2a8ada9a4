//! C ABI over `eegprint`.
//!
//! Objects are opaque handles created by `eeg_*_new`/`eeg_*_load`-style
//! constructors and released with the matching `eeg_*_free`. Every fallible
//! call returns an [`EegStatus`]; on failure the message is available from
//! [`eeg_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use eegprint::biometric::{self, ScoreSet};
use eegprint::connectivity::{self, BlockSums};
use eegprint::dsp::{band_phase_with_order, DEFAULT_ORDER};
use eegprint::edf::{parse_edf, Recording};
use eegprint::{Band, BandDefinition, Condition, Method, PhaseSeries};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    IoError = 4,
    SignalError = 5,
    ComputeError = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum EegCondition {
    EyesOpen = 0,
    EyesClosed = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum EegBand {
    HighBeta = 0,
    Gamma = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum EegMethod {
    Pli = 0,
    Plv = 1,
}

/// Opaque recording handle.
pub struct EegRecording(Recording);

/// Opaque phase-series handle.
pub struct EegPhaseSeries(PhaseSeries);

/// Opaque epoch x feature table.
pub struct EegFeatures {
    rows: Vec<Vec<f64>>,
    width: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Fail(EegStatus, String);

impl Fail {
    fn new(status: EegStatus, msg: impl ToString) -> Self {
        Fail(status, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EegStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EegStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: callers pass either null or a live pointer obtained from this library.
    unsafe { p.as_ref() }
        .ok_or_else(|| Fail::new(EegStatus::NullPointer, format!("{what} is null")))
}

fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::new(EegStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn out_ptr<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::new(EegStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null output pointer supplied by the caller.
    unsafe { out.write(value) };
    Ok(())
}

fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::new(EegStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: NUL-terminated string supplied by the caller.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail::new(EegStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn condition(c: i32) -> Result<Condition, Fail> {
    match c {
        0 => Ok(Condition::EyesOpen),
        1 => Ok(Condition::EyesClosed),
        _ => Err(Fail::new(
            EegStatus::InvalidArgument,
            format!("unknown condition {c}"),
        )),
    }
}

fn band(b: i32) -> Result<Band, Fail> {
    match b {
        0 => Ok(Band::HighBeta),
        1 => Ok(Band::Gamma),
        _ => Err(Fail::new(
            EegStatus::InvalidArgument,
            format!("unknown band {b}"),
        )),
    }
}

fn method(m: i32) -> Result<Method, Fail> {
    match m {
        0 => Ok(Method::Pli),
        1 => Ok(Method::Plv),
        _ => Err(Fail::new(
            EegStatus::InvalidArgument,
            format!("unknown method {m}"),
        )),
    }
}

fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> Result<(), Fail> {
    if capacity < src.len() {
        return Err(Fail::new(
            EegStatus::InvalidArgument,
            format!("buffer holds {capacity} values, need {}", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(Fail::new(EegStatus::NullPointer, "output buffer is null"));
    }
    // SAFETY: `out` has room for `capacity >= src.len()` doubles.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, src.len()) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eeg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eeg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an in-memory EDF image; annotation channels are dropped.
///
/// # Safety
/// `bytes` must point to `len` readable bytes, `subject_id` to a
/// NUL-terminated string and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_from_bytes(
    bytes: *const u8,
    len: usize,
    subject_id: *const c_char,
    condition_id: i32,
    out: *mut *mut EegRecording,
) -> EegStatus {
    guard(|| {
        if bytes.is_null() {
            return Err(Fail::new(EegStatus::NullPointer, "bytes is null"));
        }
        let data = std::slice::from_raw_parts(bytes, len);
        let subject = c_str(subject_id, "subject_id")?;
        let cond = condition(condition_id)?;
        let edf = parse_edf(data).map_err(|e| Fail::new(EegStatus::ParseError, e))?;
        let rec = Recording::from_edf(&edf, subject, cond)
            .map_err(|e| Fail::new(EegStatus::ParseError, e))?;
        out_ptr(out, Box::into_raw(Box::new(EegRecording(rec))), "out")
    })
}

/// Reads and parses an EDF file.
///
/// # Safety
/// `path` and `subject_id` must be NUL-terminated strings; `out` must be
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_load(
    path: *const c_char,
    subject_id: *const c_char,
    condition_id: i32,
    out: *mut *mut EegRecording,
) -> EegStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let subject = c_str(subject_id, "subject_id")?;
        let cond = condition(condition_id)?;
        let rec = Recording::load(Path::new(path), subject, cond).map_err(|e| match e {
            eegprint::edf::EdfError::Io { .. } => Fail::new(EegStatus::IoError, e),
            other => Fail::new(EegStatus::ParseError, other),
        })?;
        out_ptr(out, Box::into_raw(Box::new(EegRecording(rec))), "out")
    })
}

/// # Safety
/// `rec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_n_channels(rec: *const EegRecording) -> usize {
    rec.as_ref().map_or(0, |r| r.0.n_channels())
}

/// # Safety
/// `rec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_n_samples(rec: *const EegRecording) -> usize {
    rec.as_ref().map_or(0, |r| r.0.n_samples())
}

/// # Safety
/// `rec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_sample_rate(rec: *const EegRecording) -> f64 {
    rec.as_ref().map_or(0.0, |r| r.0.sample_rate)
}

/// Copies one channel (physical units) into `out`.
///
/// # Safety
/// `rec` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_channel(
    rec: *const EegRecording,
    channel: usize,
    out: *mut f64,
    capacity: usize,
) -> EegStatus {
    guard(|| {
        let r = non_null(rec, "recording")?;
        let ch = r.0.data.get(channel).ok_or_else(|| {
            Fail::new(
                EegStatus::InvalidArgument,
                format!("channel {channel} out of range"),
            )
        })?;
        copy_out(ch, out, capacity)
    })
}

/// # Safety
/// `rec` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eeg_recording_free(rec: *mut EegRecording) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Band-limits every channel (order-4 Butterworth, forward-backward) and
/// extracts instantaneous phase. `band_id` is an [`EegBand`].
///
/// # Safety
/// `rec` must be a live handle; `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eeg_band_phase(
    rec: *const EegRecording,
    band_id: i32,
    out: *mut *mut EegPhaseSeries,
) -> EegStatus {
    guard(|| {
        let r = non_null(rec, "recording")?;
        let b = band(band_id)?;
        phase_into(&r.0, &b.definition(), DEFAULT_ORDER, out)
    })
}

/// Same as [`eeg_band_phase`] for an arbitrary pass band and prototype order.
///
/// # Safety
/// `rec` must be a live handle; `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eeg_band_phase_custom(
    rec: *const EegRecording,
    low_hz: f64,
    high_hz: f64,
    order: usize,
    out: *mut *mut EegPhaseSeries,
) -> EegStatus {
    guard(|| {
        let r = non_null(rec, "recording")?;
        phase_into(&r.0, &BandDefinition::custom(low_hz, high_hz), order, out)
    })
}

fn phase_into(
    rec: &Recording,
    def: &BandDefinition,
    order: usize,
    out: *mut *mut EegPhaseSeries,
) -> Result<(), Fail> {
    let series =
        band_phase_with_order(rec, def, order).map_err(|e| Fail::new(EegStatus::SignalError, e))?;
    out_ptr(out, Box::into_raw(Box::new(EegPhaseSeries(series))), "out")
}

/// # Safety
/// `ps` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_phase_n_channels(ps: *const EegPhaseSeries) -> usize {
    ps.as_ref().map_or(0, |p| p.0.n_channels())
}

/// # Safety
/// `ps` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_phase_n_samples(ps: *const EegPhaseSeries) -> usize {
    ps.as_ref().map_or(0, |p| p.0.n_samples())
}

/// Copies the wrapped phase of one channel, radians in (−π, π].
///
/// # Safety
/// `ps` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn eeg_phase_channel(
    ps: *const EegPhaseSeries,
    channel: usize,
    out: *mut f64,
    capacity: usize,
) -> EegStatus {
    guard(|| {
        let p = non_null(ps, "phase series")?;
        let ch = p.0.phases.get(channel).ok_or_else(|| {
            Fail::new(
                EegStatus::InvalidArgument,
                format!("channel {channel} out of range"),
            )
        })?;
        copy_out(ch, out, capacity)
    })
}

/// # Safety
/// `ps` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eeg_phase_free(ps: *mut EegPhaseSeries) {
    if !ps.is_null() {
        drop(Box::from_raw(ps));
    }
}

/// Connectivity features (strict upper triangle, row-major pair order) for
/// every non-overlapping epoch of `window_s` seconds. `method_id` is an
/// [`EegMethod`].
///
/// # Safety
/// `ps` must be a live handle; `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eeg_features(
    ps: *const EegPhaseSeries,
    method_id: i32,
    window_s: f64,
    out: *mut *mut EegFeatures,
) -> EegStatus {
    guard(|| {
        let p = non_null(ps, "phase series")?;
        let m = method(method_id)?;
        let w = connectivity::window_samples(window_s, p.0.sample_rate)
            .map_err(|e| Fail::new(EegStatus::InvalidArgument, e))?;
        let sums = BlockSums::new(&p.0, w).map_err(|e| Fail::new(EegStatus::ComputeError, e))?;
        let rows = sums
            .features(m, window_s)
            .map_err(|e| Fail::new(EegStatus::ComputeError, e))?;
        let width = connectivity::n_features(p.0.n_channels());
        out_ptr(
            out,
            Box::into_raw(Box::new(EegFeatures { rows, width })),
            "out",
        )
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_features_n_epochs(f: *const EegFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.rows.len())
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eeg_features_width(f: *const EegFeatures) -> usize {
    f.as_ref().map_or(0, |f| f.width)
}

/// # Safety
/// `f` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn eeg_features_row(
    f: *const EegFeatures,
    epoch: usize,
    out: *mut f64,
    capacity: usize,
) -> EegStatus {
    guard(|| {
        let f = non_null(f, "features")?;
        let row = f.rows.get(epoch).ok_or_else(|| {
            Fail::new(
                EegStatus::InvalidArgument,
                format!("epoch {epoch} out of range"),
            )
        })?;
        copy_out(row, out, capacity)
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eeg_features_free(f: *mut EegFeatures) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Phase lag index of two phase sequences of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_pli(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
) -> EegStatus {
    guard(|| {
        let v = connectivity::pli(slice(a, n, "a")?, slice(b, n, "b")?)
            .map_err(|e| Fail::new(EegStatus::InvalidArgument, e))?;
        out_ptr(out, v, "out")
    })
}

/// Phase locking value of two phase sequences of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_plv(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
) -> EegStatus {
    guard(|| {
        let v = connectivity::plv(slice(a, n, "a")?, slice(b, n, "b")?)
            .map_err(|e| Fail::new(EegStatus::InvalidArgument, e))?;
        out_ptr(out, v, "out")
    })
}

/// `1 / (1 + ‖a − b‖)` for two feature vectors of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_similarity(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
) -> EegStatus {
    guard(|| {
        let v = biometric::similarity(slice(a, n, "a")?, slice(b, n, "b")?)
            .map_err(|e| Fail::new(EegStatus::InvalidArgument, e))?;
        out_ptr(out, v, "out")
    })
}

fn score_set(
    genuine: *const f64,
    n_genuine: usize,
    impostor: *const f64,
    n_impostor: usize,
) -> Result<ScoreSet, Fail> {
    Ok(ScoreSet::new(
        slice(genuine, n_genuine, "genuine")?.to_vec(),
        slice(impostor, n_impostor, "impostor")?.to_vec(),
    ))
}

/// Equal error rate of a genuine/impostor score set (higher = more similar).
///
/// # Safety
/// The score arrays must hold the stated counts; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_eer(
    genuine: *const f64,
    n_genuine: usize,
    impostor: *const f64,
    n_impostor: usize,
    out: *mut f64,
) -> EegStatus {
    guard(|| {
        let s = score_set(genuine, n_genuine, impostor, n_impostor)?;
        let curve = biometric::roc(&s).map_err(|e| Fail::new(EegStatus::InvalidArgument, e))?;
        out_ptr(out, biometric::eer(&curve), "out")
    })
}

/// Area under the ROC curve: P(genuine > impostor) + ½ P(tie).
///
/// # Safety
/// The score arrays must hold the stated counts; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_auc(
    genuine: *const f64,
    n_genuine: usize,
    impostor: *const f64,
    n_impostor: usize,
    out: *mut f64,
) -> EegStatus {
    guard(|| {
        let s = score_set(genuine, n_genuine, impostor, n_impostor)?;
        let v = biometric::auc(&s).map_err(|e| Fail::new(EegStatus::InvalidArgument, e))?;
        out_ptr(out, v, "out")
    })
}
