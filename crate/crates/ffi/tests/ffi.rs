use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use halving_lab_ffi::*;

fn schema(text: &str) -> *mut HlSchema {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hl_schema_parse(c.as_ptr(), &mut out) }, HlStatus::Ok);
    assert!(!out.is_null());
    out
}

fn take(s: *mut c_char) -> String {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { hl_string_free(s) };
    text
}

fn last_error() -> Option<String> {
    let p = hl_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn schema_round_trip_and_counts() {
    let evens = schema("evens");
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { hl_schema_to_string(evens, &mut text) }, HlStatus::Ok);
    assert_eq!(take(text), "periodic(;1,0)");
    let mut hit = false;
    assert_eq!(unsafe { hl_schema_contains(evens, 10, &mut hit) }, HlStatus::Ok);
    assert!(hit);
    assert_eq!(unsafe { hl_schema_contains(evens, 7, &mut hit) }, HlStatus::Ok);
    assert!(!hit);
    let mut count = 0;
    assert_eq!(unsafe { hl_schema_count_below(evens, 11, &mut count) }, HlStatus::Ok);
    assert_eq!(count, 6);
    unsafe { hl_schema_free(evens) };
}

#[test]
fn densities_are_exact_strings() {
    let evens = schema("evens");
    let all = schema("omega");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hl_initial_density(evens, 7, &mut out) }, HlStatus::Ok);
    assert_eq!(take(out), "4/7");
    assert_eq!(unsafe { hl_relative_density(evens, all, 10, &mut out) }, HlStatus::Ok);
    assert_eq!(take(out), "1/2");
    assert_eq!(unsafe { hl_initial_density(evens, 0, &mut out) }, HlStatus::Precondition);
    assert!(last_error().is_some());
    unsafe {
        hl_schema_free(evens);
        hl_schema_free(all);
    }
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let bad = CString::new("periodic(;").unwrap();
    assert_eq!(unsafe { hl_schema_parse(bad.as_ptr(), &mut out) }, HlStatus::Parse);
    assert!(out.is_null());
    assert!(last_error().is_some());
    assert_eq!(unsafe { hl_schema_parse(ptr::null(), &mut out) }, HlStatus::NullPointer);
    let evens = CString::new("evens").unwrap();
    assert_eq!(unsafe { hl_schema_parse(evens.as_ptr(), ptr::null_mut()) }, HlStatus::NullPointer);
    let not_utf8 = [0xffu8, 0];
    assert_eq!(unsafe { hl_schema_parse(not_utf8.as_ptr().cast(), &mut out) }, HlStatus::InvalidUtf8);
    let mut count = 0;
    assert_eq!(unsafe { hl_schema_count_below(ptr::null(), 3, &mut count) }, HlStatus::NullPointer);
    let s = schema("evens");
    assert_eq!(last_error(), None);
    unsafe {
        hl_schema_free(s);
        hl_schema_free(ptr::null_mut());
        hl_string_free(ptr::null_mut());
    }
}

#[test]
fn conditions() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { hl_condition_generic_run(2, 20, 256, 7, &mut p) }, HlStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { hl_condition_n(p, &mut n) }, HlStatus::Ok);
    assert!(n >= 256);
    let mut violations = usize::MAX;
    assert_eq!(unsafe { hl_condition_validate(p, &mut violations) }, HlStatus::Ok);
    assert_eq!(violations, 0);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hl_condition_to_json(p, &mut json) }, HlStatus::Ok);
    let text = CString::new(take(json)).unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { hl_condition_from_json(text.as_ptr(), &mut q) }, HlStatus::Ok);
    let mut holds = false;
    assert_eq!(unsafe { hl_condition_leq(q, p, &mut holds) }, HlStatus::Ok);
    assert!(holds);
    let mut small = ptr::null_mut();
    assert_eq!(unsafe { hl_condition_generic_run(1, 2, 16, 7, &mut small) }, HlStatus::Ok);
    assert_eq!(unsafe { hl_condition_leq(small, p, &mut holds) }, HlStatus::Ok);
    assert!(!holds);
    assert_eq!(unsafe { hl_condition_generic_run(0, 2, 16, 7, &mut small) }, HlStatus::Precondition);
    let junk = CString::new("{").unwrap();
    assert_eq!(unsafe { hl_condition_from_json(junk.as_ptr(), &mut q) }, HlStatus::Parse);
    unsafe {
        hl_condition_free(p);
        hl_condition_free(q);
        hl_condition_free(small);
    }
}

#[test]
fn montecarlo() {
    let all = schema("omega");
    let (mut a, mut b) = (0, 0);
    assert_eq!(unsafe { hl_estimate_recurrence(all, 16, 400, 1, &mut a) }, HlStatus::Ok);
    assert_eq!(unsafe { hl_estimate_recurrence(all, 16, 400, 1, &mut b) }, HlStatus::Ok);
    assert_eq!(a, b);
    assert!(a > 200 && a <= 400);
    unsafe { hl_schema_free(all) };
    let (mut stated, mut derived) = (0.0, 0.0);
    assert_eq!(unsafe { hl_delta_n_ln(729, 1, 3, 3, false, &mut stated) }, HlStatus::Ok);
    assert_eq!(unsafe { hl_delta_n_ln(729, 1, 3, 3, true, &mut derived) }, HlStatus::Ok);
    assert!(stated < derived);
    assert_eq!(unsafe { hl_delta_n_ln(729, 1, 0, 3, true, &mut derived) }, HlStatus::Precondition);
    assert_eq!(unsafe { hl_delta_n_ln(729, 0, 1, 3, true, &mut derived) }, HlStatus::Precondition);
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("halving_lab.h");
    assert!(header.exists(), "header not generated");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["hl_schema_parse", "hl_condition_leq", "hl_delta_n_ln", "HL_STATUS_PANIC"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, "#include \"halving_lab.h\"\nint main(void) { return hl_last_error_message() != 0; }\n").unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(&include).arg(&src).status() {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler; header syntax check skipped"),
    }
}

