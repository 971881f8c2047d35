use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use solgeo_ffi::*;

fn last_error() -> String {
    let need = unsafe { solgeo_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; need.max(1)];
    unsafe { solgeo_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn run(cfg: &str) -> (SolgeoStatus, *mut SolgeoReport) {
    let c = CString::new(cfg).unwrap();
    let mut r = ptr::null_mut();
    (unsafe { solgeo_run_json(c.as_ptr(), &mut r) }, r)
}

fn report_json(r: *const SolgeoReport) -> serde_json::Value {
    let need = unsafe { solgeo_report_json(r, ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; need];
    // a short buffer is left untouched
    assert_eq!(unsafe { solgeo_report_json(r, buf.as_mut_ptr(), 1) }, need);
    assert_eq!(buf[0], 0);
    unsafe { solgeo_report_json(r, buf.as_mut_ptr(), need) };
    serde_json::from_slice(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes()).unwrap()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(solgeo_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn run_check_and_read_report() {
    let (st, r) = run(r#"{"command": "check", "system": "mlxii", "case": "pure-gauge", "refine": 2, "timing": false}"#);
    assert_eq!(st, SolgeoStatus::Ok);
    assert_eq!(unsafe { solgeo_report_passed(r) }, 1);
    let j = report_json(r);
    assert_eq!(j["pass"], true);
    assert!(j.get("timing").is_none());
    unsafe { solgeo_report_free(r) };

    let (st, r) = run(r#"{"command": "check", "eq": "ds", "case": "planewave-ds", "params": {"omega_scale": 1.1}}"#);
    assert_eq!(st, SolgeoStatus::Ok);
    assert_eq!(unsafe { solgeo_report_passed(r) }, 0);
    unsafe { solgeo_report_free(r) };
}

#[test]
fn errors_set_status_and_message() {
    let (st, r) = run(r#"{"command": "check", "system": "mlxii", "case": "torus"}"#);
    assert_eq!(st, SolgeoStatus::Domain);
    assert!(r.is_null());
    assert!(last_error().contains("torus"));

    let (st, _) = run(r#"{"command": "explode"}"#);
    assert_eq!(st, SolgeoStatus::InvalidArgument);
    let (st, _) = run("not json");
    assert_eq!(st, SolgeoStatus::InvalidArgument);
    assert!(last_error().starts_with("config"));

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { solgeo_run_json(ptr::null(), &mut r) }, SolgeoStatus::NullPointer);
    let c = CString::new("{}").unwrap();
    assert_eq!(unsafe { solgeo_run_json(c.as_ptr(), ptr::null_mut()) }, SolgeoStatus::NullPointer);

    // null handles are tolerated by queries and frees
    assert_eq!(unsafe { solgeo_report_passed(ptr::null()) }, 0);
    assert_eq!(unsafe { solgeo_frames_len(ptr::null()) }, 0);
    assert!(unsafe { solgeo_frames_max_defect(ptr::null()) }.is_nan());
    unsafe {
        solgeo_report_free(ptr::null_mut());
        solgeo_frames_free(ptr::null_mut());
        solgeo_surface_free(ptr::null_mut());
    }
}

#[test]
fn frames_stay_orthonormal() {
    for (beta, sigma) in [(1.0, 0.2), (-1.0, 0.0)] {
        let mut f = ptr::null_mut();
        assert_eq!(unsafe { solgeo_frame_propagate(1.0, 0.3, sigma, beta, 1e-2, 200, &mut f) }, SolgeoStatus::Ok);
        assert_eq!(unsafe { solgeo_frames_len(f) }, 201);
        let mut e = [0.0; 9];
        assert_eq!(unsafe { solgeo_frames_get(f, 0, e.as_mut_ptr()) }, SolgeoStatus::Ok);
        assert_eq!(e, [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(unsafe { solgeo_frames_get(f, 201, e.as_mut_ptr()) }, SolgeoStatus::InvalidArgument);
        let d = unsafe { solgeo_frames_max_defect(f) };
        assert!(d < 1e-10, "beta {beta}: {d:e}");
        unsafe { solgeo_frames_free(f) };
    }
    // the curve generator keeps +σ in entry (3,1), which is pseudo-orthogonal for β = +1 only
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { solgeo_frame_propagate(1.0, 0.3, 0.2, -1.0, 1e-2, 200, &mut f) }, SolgeoStatus::Ok);
    assert!(unsafe { solgeo_frames_max_defect(f) } > 1e-3);
    unsafe { solgeo_frames_free(f) };
    assert_eq!(unsafe { solgeo_frame_propagate(1.0, 0.0, 0.0, 0.5, 1e-2, 10, &mut f) }, SolgeoStatus::Domain);
    assert_eq!(unsafe { solgeo_frame_propagate(1.0, 0.0, 0.0, 1.0, 1e-2, 0, &mut f) }, SolgeoStatus::InvalidArgument);
}

#[test]
fn sphere_patch_positions_lie_on_sphere() {
    let name = CString::new("sphere-patch").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { solgeo_surface_case(name.as_ptr(), 9, &mut s) }, SolgeoStatus::Ok);
    let len = unsafe { solgeo_surface_len(s) };
    assert_eq!(len, 81);
    let mut pos = vec![0.0; 3 * len];
    assert_eq!(unsafe { solgeo_surface_positions(s, pos.as_mut_ptr(), pos.len() - 1) }, SolgeoStatus::InvalidArgument);
    assert_eq!(unsafe { solgeo_surface_positions(s, pos.as_mut_ptr(), pos.len()) }, SolgeoStatus::Ok);
    let (mut mp, mut shape) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { solgeo_surface_diagnostics(s, &mut mp, ptr::null_mut(), &mut shape) }, SolgeoStatus::Ok);
    assert!(mp.is_finite() && shape < 1e-2, "mixed {mp} shape {shape}");
    unsafe { solgeo_surface_free(s) };

    let name = CString::new("planewave-ds").unwrap();
    assert_eq!(unsafe { solgeo_surface_case(name.as_ptr(), 0, &mut s) }, SolgeoStatus::InvalidArgument);
    assert!(s.is_null());
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

fn static_lib() -> Option<PathBuf> {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libsolgeo_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(crate_dir().join("include/solgeo.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 15);
    for f in exported {
        assert!(h.contains(&format!(" {f}(")) || h.contains(&format!("*{f}(")), "{f} missing from header");
    }
}

#[test]
fn c_program_links_against_static_lib() {
    let (Some(cc), Some(lib)) = (cc(), static_lib()) else {
        eprintln!("skipped: no C compiler or static library");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "solgeo.h"

int main(void) {
    SolgeoFrames *f = NULL;
    if (solgeo_frame_propagate(1.0, 0.0, 0.0, 1.0, 0.01, 100, &f) != SOLGEO_STATUS_OK) return 3;
    double e[9];
    if (solgeo_frames_get(f, 100, e) != SOLGEO_STATUS_OK) return 4;
    printf("%zu %.3f\n", solgeo_frames_len(f), solgeo_frames_max_defect(f) * 1e6);
    solgeo_frames_free(f);

    SolgeoReport *r = NULL;
    if (solgeo_run_json("{\"command\": \"bogus\"}", &r) == SOLGEO_STATUS_OK) return 5;
    char msg[256];
    if (solgeo_last_error(msg, sizeof msg) == 0) return 6;
    if (solgeo_run_json("{\"command\": \"check\", \"system\": \"mlxii\", \"case\": \"pure-gauge\", \"refine\": 2}", &r) != SOLGEO_STATUS_OK) return 7;
    int ok = solgeo_report_passed(r);
    solgeo_report_free(r);
    return ok ? 0 : 8;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let o = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(Path::new(&exe)).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "101 0.000");
}
