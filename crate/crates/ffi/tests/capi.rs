use std::ffi::{CStr, CString};
use std::ptr;

use cannings_ffi::*;

const WF: &str = r#"{"d":2,"N":[4,6],"law":"wright-fisher","counts":[[3,2],[1,4]]}"#;

fn model() -> *mut CanningsModel {
    let json = CString::new(WF).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cannings_model_from_json(json.as_ptr(), &mut m) }, CanningsStatus::Ok);
    assert!(!m.is_null());
    m
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { cannings_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cannings_last_error_message()) }.to_str().unwrap().to_string()
}

#[test]
fn exact_matrix_round_trip() {
    let m = model();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cannings_transition_matrix(m, 2, &mut p) }, CanningsStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { cannings_matrix_dim(p, &mut dim) }, CanningsStatus::Ok);
    assert_eq!(dim, 6);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cannings_matrix_state(p, 2, &mut s) }, CanningsStatus::Ok);
    assert_eq!(take(s), "1:1|2:1");
    assert_eq!(unsafe { cannings_matrix_entry_fraction(p, 2, 0, &mut s) }, CanningsStatus::Ok);
    assert_eq!(take(s), "1/8");
    let mut x = 0.0;
    assert_eq!(unsafe { cannings_matrix_entry_f64(p, 2, 0, &mut x) }, CanningsStatus::Ok);
    assert_eq!(x, 0.125);
    assert_eq!(unsafe { cannings_matrix_to_csv(p, &mut s) }, CanningsStatus::Ok);
    assert_eq!(take(s).lines().count(), 7);
    assert_eq!(unsafe { cannings_matrix_entry_f64(p, 6, 0, &mut x) }, CanningsStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));
    unsafe {
        cannings_matrix_free(p);
        cannings_model_free(m);
    }
}

#[test]
fn estimates_have_no_fractions() {
    let m = model();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cannings_mc_estimate(m, 2, 2000, 5, &mut p) }, CanningsStatus::Ok);
    let mut x = -1.0;
    assert_eq!(unsafe { cannings_matrix_entry_f64(p, 0, 0, &mut x) }, CanningsStatus::Ok);
    assert!((x - 0.75).abs() < 0.1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cannings_matrix_entry_fraction(p, 0, 0, &mut s) }, CanningsStatus::Unsupported);
    unsafe {
        cannings_matrix_free(p);
        cannings_model_free(m);
    }
}

#[test]
fn consistency_report() {
    let m = model();
    let mut passed = false;
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { cannings_check_consistency(m, 3, &mut passed, &mut report) }, CanningsStatus::Ok);
    assert!(passed);
    assert!(take(report).contains("\"consistency\""));
    assert_eq!(unsafe { cannings_check_consistency(m, 3, &mut passed, ptr::null_mut()) }, CanningsStatus::Ok);
    unsafe { cannings_model_free(m) };
}

#[test]
fn error_codes() {
    let mut m = ptr::null_mut();
    let bad = CString::new(r#"{"d":2,"N":[4,6],"law":"wright-fisher","counts":[[3,2],[1,5]]}"#).unwrap();
    assert_eq!(unsafe { cannings_model_from_json(bad.as_ptr(), &mut m) }, CanningsStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(!last_error().is_empty());
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { cannings_model_from_json(junk.as_ptr(), &mut m) }, CanningsStatus::ParseError);
    assert_eq!(unsafe { cannings_model_from_json(ptr::null(), &mut m) }, CanningsStatus::NullPointer);
    let mut d = 0;
    assert_eq!(unsafe { cannings_model_d(ptr::null(), &mut d) }, CanningsStatus::NullPointer);
    let mut count = 0;
    assert_eq!(unsafe { cannings_partition_count(2, 2, &mut count) }, CanningsStatus::Ok);
    assert_eq!(count, 6);
    assert!(last_error().is_empty());
    assert_eq!(unsafe { cannings_partition_count(40, 4, &mut count) }, CanningsStatus::CapExceeded);
    let big = model();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cannings_transition_matrix(big, 9, &mut p) }, CanningsStatus::CapExceeded);
    unsafe { cannings_model_free(big) };
}

#[test]
fn xi_rate() {
    let spec = CString::new(r#"{"a":[0,0],"atoms":[{"mass":1.0,"x":[0.5,0.25],"y":[1,2]}]}"#).unwrap();
    let diag = CString::new("2;2").unwrap();
    let mut r = 0.0;
    assert_eq!(unsafe { cannings_xi_rate(spec.as_ptr(), diag.as_ptr(), &mut r) }, CanningsStatus::Ok);
    assert!((r - 0.05).abs() < 1e-12);
    let bad = CString::new("2;x").unwrap();
    assert_eq!(unsafe { cannings_xi_rate(spec.as_ptr(), bad.as_ptr(), &mut r) }, CanningsStatus::ParseError);
}

#[test]
fn header_lists_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cannings.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("CANNINGS_STATUS_NULL_POINTER = 6"));
}
