use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use esfcheck_ffi::*;

/// Takes ownership of a library string.
unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    esfcheck_string_free(s);
    out
}

unsafe fn last_error() -> String {
    take(esfcheck_last_error())
}

#[test]
fn compute_and_errors() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(esfcheck_compute(1, 1, 3, 1, &mut out), EsfStatus::Ok);
        assert_eq!(take(out), "11/6");
        assert_eq!(esfcheck_compute(1, 1, 3, 2, &mut out), EsfStatus::Ok);
        assert_eq!(take(out), "1");

        assert_eq!(esfcheck_compute(1, 1, 3, 4, &mut out), EsfStatus::InvalidArgument);
        assert!(last_error().contains("outside"));
        assert_eq!(esfcheck_compute(0, 1, 3, 1, &mut out), EsfStatus::InvalidArgument);
        assert_eq!(esfcheck_compute(1, 1, 3, 1, ptr::null_mut()), EsfStatus::NullPointer);
    }
}

#[test]
fn state_handle_streams_values() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(esfcheck_state_new(1, 1, 3, &mut h), EsfStatus::Ok);
        assert_eq!(esfcheck_state_n(h), 0);
        assert_eq!(esfcheck_state_advance_to(h, 3), EsfStatus::Ok);
        assert_eq!(esfcheck_state_n(h), 3);

        let mut s = ptr::null_mut();
        assert_eq!(esfcheck_state_value(h, 2, &mut s), EsfStatus::Ok);
        assert_eq!(take(s), "1");
        let mut is_int = false;
        assert_eq!(esfcheck_state_is_integer(h, 2, &mut is_int), EsfStatus::Ok);
        assert!(is_int);
        assert_eq!(esfcheck_state_is_integer(h, 3, &mut is_int), EsfStatus::Ok);
        assert!(!is_int);

        assert_eq!(esfcheck_state_value(h, 9, &mut s), EsfStatus::InvalidArgument);
        assert_eq!(esfcheck_state_advance_to(h, 2), EsfStatus::InvalidArgument);
        assert!(last_error().contains("rewind"));

        esfcheck_state_free(h);
        esfcheck_state_free(ptr::null_mut());
        assert_eq!(esfcheck_state_new(1, 1, 3, ptr::null_mut()), EsfStatus::NullPointer);
    }
}

#[test]
fn decide_witness_verify() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(esfcheck_decide_json(1, 1, 12, 2, true, &mut out), EsfStatus::Ok);
        let d: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(d["verdict"], "non-integer");
        assert_eq!(d["evidence"]["certificate"]["p"], "5");

        assert_eq!(esfcheck_witness_json(1, 1, 12, 2, &mut out), EsfStatus::Ok);
        let cert = take(out);
        let c = CString::new(cert.clone()).unwrap();
        let mut report = ptr::null_mut();
        assert_eq!(esfcheck_verify_json(c.as_ptr(), true, &mut report), EsfStatus::Ok);
        let r: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(r["exact_valuation"], "-2");

        let mut v: serde_json::Value = serde_json::from_str(&cert).unwrap();
        v["p"] = "7".into();
        let edited = CString::new(v.to_string()).unwrap();
        assert_eq!(esfcheck_verify_json(edited.as_ptr(), false, &mut report), EsfStatus::VerifyFailed);
        let r: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(r["passed"], false);

        let junk = CString::new("{").unwrap();
        assert_eq!(esfcheck_verify_json(junk.as_ptr(), false, ptr::null_mut()), EsfStatus::Parse);
        assert_eq!(esfcheck_verify_json(ptr::null(), false, ptr::null_mut()), EsfStatus::NullPointer);

        assert_eq!(esfcheck_witness_json(1, 1, 7, 2, &mut out), EsfStatus::NotFound);
        assert!(last_error().contains("no witness"));
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(esfcheck_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/esfcheck.h")).unwrap();
    for sym in [
        "typedef struct EsfHandle EsfHandle;",
        "ESF_STATUS_VERIFY_FAILED = 3",
        "esfcheck_state_new(",
        "esfcheck_verify_json(",
        "esfcheck_string_free(",
        "esfcheck_last_error(",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}

/// Compiles a C program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_and_runs() {
    // target/<profile>/deps/ffi-* -> target/<profile>/libesfcheck_ffi.a
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libesfcheck_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "esfcheck.h"

int main(void) {
    char *v = NULL;
    if (esfcheck_compute(1, 1, 3, 1, &v) != ESF_STATUS_OK) return 10;
    if (strcmp(v, "11/6") != 0) return 11;
    esfcheck_string_free(v);

    EsfHandle *h = NULL;
    if (esfcheck_state_new(1, 1, 2, &h) != ESF_STATUS_OK) return 12;
    esfcheck_state_advance_to(h, 3);
    bool is_int = false;
    esfcheck_state_is_integer(h, 2, &is_int);
    esfcheck_state_free(h);
    if (!is_int) return 13;

    char *cert = NULL;
    if (esfcheck_witness_json(1, 1, 12, 2, &cert) != ESF_STATUS_OK) return 14;
    EsfStatus st = esfcheck_verify_json(cert, true, NULL);
    esfcheck_string_free(cert);
    if (st != ESF_STATUS_OK) return 15;

    if (esfcheck_compute(1, 1, 3, 4, &v) != ESF_STATUS_INVALID_ARGUMENT) return 16;
    char *err = esfcheck_last_error();
    printf("%s\n", err);
    esfcheck_string_free(err);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("outside"));
}
