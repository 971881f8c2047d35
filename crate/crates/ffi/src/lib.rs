//! C ABI over solgeo.
//!
//! Every fallible call returns a [`SolgeoStatus`]; on failure the message is
//! kept per thread and read with [`solgeo_last_error`]. Handles are opaque
//! and released with their `_free` function. Functions never unwind across
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use solgeo::cases::{build_case, CaseData, CaseName, CASE_SEED};
use solgeo::cli::{cmd_case, cmd_check, cmd_frame, cmd_surface, Report, RunConfig};
use solgeo::error::SolgeoError;
use solgeo::frames::{propagate_frenet, reconstruct_surface, FrameField, FrameTriad, Reconstruction};
use solgeo::liealg::{CoeffTriple, Sign};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolgeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Constraint = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &SolgeoError) -> SolgeoStatus {
    match e {
        SolgeoError::Domain(_) | SolgeoError::Format(_) | SolgeoError::Json(_) => SolgeoStatus::Domain,
        SolgeoError::Constraint { .. } => SolgeoStatus::Constraint,
        SolgeoError::Numerical(_) => SolgeoStatus::Numerical,
        SolgeoError::Io(_) => SolgeoStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SolgeoStatus, String)>) -> SolgeoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SolgeoStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            SolgeoStatus::Panic
        }
    }
}

fn lib<T>(r: Result<T, SolgeoError>) -> Result<T, (SolgeoStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SolgeoStatus, String) {
    (SolgeoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SolgeoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (SolgeoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Copy `s` plus a terminating NUL into `buf` when it fits. Returns the
/// length the buffer needs, NUL included.
unsafe fn copy_out(s: &[u8], buf: *mut c_char, len: usize) -> usize {
    if !buf.is_null() && len > s.len() {
        ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
        *buf.add(s.len()) = 0;
    }
    s.len() + 1
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn solgeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the last error message of this thread into `buf`. Returns the size
/// needed (0 when there is no error).
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn solgeo_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(s) => copy_out(s.as_bytes(), buf, len),
        None => 0,
    })
}

/// Result of a run: the JSON report and its verdict.
pub struct SolgeoReport {
    json: Vec<u8>,
    pass: bool,
}

/// Run a command from a JSON configuration (the CLI `--config` format; the
/// `command` key selects check, surface, case or frame).
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn solgeo_run_json(config_json: *const c_char, out: *mut *mut SolgeoReport) -> SolgeoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(config_json, "config_json")?;
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| (SolgeoStatus::InvalidArgument, format!("config: {e}")))?;
        let report: Report = lib(match cfg.command.as_str() {
            "check" => cmd_check(&cfg),
            "surface" => cmd_surface(&cfg),
            "case" => cmd_case(&cfg),
            "frame" => cmd_frame(&cfg),
            c => return Err((SolgeoStatus::InvalidArgument, format!("unknown command '{c}'"))),
        })?;
        let json = lib(report.to_json())?.into_bytes();
        *out = Box::into_raw(Box::new(SolgeoReport { json, pass: report.pass }));
        Ok(())
    })
}

/// 1 when every check passed, 0 otherwise (also for a null handle).
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn solgeo_report_passed(r: *const SolgeoReport) -> i32 {
    r.as_ref().map_or(0, |r| r.pass as i32)
}

/// Copy the report JSON into `buf`; returns the size needed.
///
/// # Safety
/// `r` must be a live report handle; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn solgeo_report_json(r: *const SolgeoReport, buf: *mut c_char, len: usize) -> usize {
    r.as_ref().map_or(0, |r| copy_out(&r.json, buf, len))
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn solgeo_report_free(r: *mut SolgeoReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Frames along a curve.
pub struct SolgeoFrames(FrameField);

/// Propagate the standard frame with constant `(k, τ, σ)` over `steps`
/// steps of size `h`; `beta` is +1 or −1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn solgeo_frame_propagate(
    k: f64,
    tau: f64,
    sigma: f64,
    beta: f64,
    h: f64,
    steps: usize,
    out: *mut *mut SolgeoFrames,
) -> SolgeoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let b = lib(Sign::from_value(beta))?;
        if steps == 0 {
            return Err((SolgeoStatus::InvalidArgument, "steps must be positive".into()));
        }
        let coeffs = vec![CoeffTriple::curve(k, tau, sigma); steps + 1];
        let ff = lib(propagate_frenet(&FrameTriad::standard(b), &coeffs, b, h))?;
        *out = Box::into_raw(Box::new(SolgeoFrames(ff)));
        Ok(())
    })
}

/// Number of frames (steps + 1); 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn solgeo_frames_len(f: *const SolgeoFrames) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// Write frame `idx` as `e1, e2, e3` (nine doubles) into `out9`.
///
/// # Safety
/// `f` must be a live handle and `out9` point to nine writable doubles.
#[no_mangle]
pub unsafe extern "C" fn solgeo_frames_get(f: *const SolgeoFrames, idx: usize, out9: *mut f64) -> SolgeoStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("frames"))?;
        if out9.is_null() {
            return Err(null("out9"));
        }
        if idx >= f.0.len() {
            return Err((SolgeoStatus::InvalidArgument, format!("index {idx} out of range (len {})", f.0.len())));
        }
        let t = f.0.triad(idx);
        let o = std::slice::from_raw_parts_mut(out9, 9);
        for (i, v) in [t.e1, t.e2, t.e3].iter().enumerate() {
            o[3 * i..3 * i + 3].copy_from_slice(v.as_slice());
        }
        Ok(())
    })
}

/// Largest deviation of the Gram matrix from `diag(β, 1, 1)`.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn solgeo_frames_max_defect(f: *const SolgeoFrames) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.max_orthonormality_defect())
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn solgeo_frames_free(f: *mut SolgeoFrames) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// A reconstructed surface.
pub struct SolgeoSurface {
    rec: Reconstruction,
    shape_error: f64,
}

/// Reconstruct a built-in surface case (`plane`, `cylinder`,
/// `sphere-patch`) with `n` points per axis (0 for the default).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn solgeo_surface_case(name: *const c_char, n: usize, out: *mut *mut SolgeoSurface) -> SolgeoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name: CaseName = lib(str_arg(name, "name")?.parse())?;
        let n = (n != 0).then_some(n);
        let CaseData::Surface { data, oracle } = lib(build_case(name, n, 0, &Default::default(), CASE_SEED))? else {
            return Err((SolgeoStatus::InvalidArgument, format!("case {name} is not a surface case")));
        };
        let rec = lib(reconstruct_surface(&data, Default::default(), None))?;
        let shape_error = oracle.error(&rec.positions);
        *out = Box::into_raw(Box::new(SolgeoSurface { rec, shape_error }));
        Ok(())
    })
}

/// Number of vertices; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn solgeo_surface_len(s: *const SolgeoSurface) -> usize {
    s.as_ref().map_or(0, |s| s.rec.positions.len())
}

/// Copy vertex positions as `x, y, z` triples (axis 0 fastest) into `out`,
/// which must hold `3 * len` doubles.
///
/// # Safety
/// `s` must be a live handle and `out` point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn solgeo_surface_positions(s: *const SolgeoSurface, out: *mut f64, cap: usize) -> SolgeoStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let need = 3 * s.rec.positions.len();
        if cap < need {
            return Err((SolgeoStatus::InvalidArgument, format!("buffer holds {cap} doubles, need {need}")));
        }
        let o = std::slice::from_raw_parts_mut(out, need);
        for (i, p) in s.rec.positions.data().iter().enumerate() {
            o[3 * i..3 * i + 3].copy_from_slice(p.as_slice());
        }
        Ok(())
    })
}

/// Mixed-partial defect, compatibility residual and distance from the
/// exact shape, written to the non-null pointers.
///
/// # Safety
/// `s` must be a live handle; each output null or writable.
#[no_mangle]
pub unsafe extern "C" fn solgeo_surface_diagnostics(
    s: *const SolgeoSurface,
    mixed_partial: *mut f64,
    gmce_residual: *mut f64,
    shape_error: *mut f64,
) -> SolgeoStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        for (p, v) in [(mixed_partial, s.rec.mixed_partial_defect), (gmce_residual, s.rec.gmce_residual), (shape_error, s.shape_error)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn solgeo_surface_free(s: *mut SolgeoSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
