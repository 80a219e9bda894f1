use std::ffi::{c_char, CString};
use std::ptr;

use coupling_scatter_ffi::*;

const EXAMPLE2: &str = r#"{"problem": {
  "Q": {"segments": [{"interval": [0.0, 1.0], "coeffs": [-9.869604401089358]}]},
  "V": {"segments": [{"interval": [0.0, 1.0], "coeffs": [-1.0]}]},
  "u0": {"value": [0.0, 0.0], "derivative": [3.141592653589793, 0.0]}}}"#;

const BARRIER: &str = r#"{"problem": {
  "Q": {"segments": [{"interval": [0.0, 1.0], "coeffs": [-1.0]}]},
  "V": {"segments": [{"interval": [0.0, 1.0], "coeffs": [1.0]}]},
  "u0": {"value": [1.0, 0.0], "derivative": [0.0, 1.0]}}}"#;

fn load(json: &str) -> *mut CsProblem {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cs_problem_from_json(text.as_ptr(), &mut p) }, CsStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let n = unsafe { cs_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; n];
    unsafe { cs_last_error_message(buf.as_mut_ptr(), n) };
    let bytes: Vec<u8> = buf.iter().take_while(|c| **c != 0).map(|c| *c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn coefficients_through_the_handle() {
    let p = load(EXAMPLE2);
    let pi2 = std::f64::consts::PI.powi(2);
    let (mut a, mut b, mut err) = (CsComplex { re: 0.0, im: 0.0 }, CsComplex { re: 0.0, im: 0.0 }, 0.0);
    let lam = CsComplex { re: 3.0 * pi2, im: 0.0 };
    assert_eq!(unsafe { cs_coefficients(p, lam, &mut a, &mut b, &mut err) }, CsStatus::Ok);
    assert!(b.re.hypot(b.im) < 1e-8);
    assert!(err >= 0.0);

    let mut m = [CsComplex { re: 0.0, im: 0.0 }; 4];
    let lam = CsComplex { re: 2.0, im: -1.0 };
    assert_eq!(unsafe { cs_transfer_matrix(p, lam, m.as_mut_ptr()) }, CsStatus::Ok);
    let c = |z: CsComplex| coupling_scatter::Complex64::new(z.re, z.im);
    let det = c(m[0]) * c(m[3]) - c(m[1]) * c(m[2]);
    assert!((det - 1.0).norm() < 1e-10);

    let mut n = 0usize;
    assert_eq!(unsafe { cs_disk_zero_count(p, 500.0, 0, &mut n) }, CsStatus::Ok);
    assert_eq!(n, 7);

    let (mut count, mut zero) = (0usize, true);
    assert_eq!(unsafe { cs_negative_eigenvalue_count(p, 5.0 * pi2, &mut count, &mut zero) }, CsStatus::Ok);
    assert_eq!((count, zero), (2, false));
    unsafe { cs_problem_free(p) };
}

#[test]
fn reflection_and_errors() {
    let p = load(BARRIER);
    let (mut r, mut defect) = (0.0, 1.0);
    assert_eq!(unsafe { cs_reflection(p, 3.0, &mut r, &mut defect) }, CsStatus::Ok);
    assert!(r > 0.0 && r < 1.0 && defect.abs() < 1e-10);

    // complex reference has no boundary angles
    let mut count = 0usize;
    let s = unsafe { cs_negative_eigenvalue_count(p, -10.0, &mut count, ptr::null_mut()) };
    assert_eq!(s, CsStatus::InvalidInput);
    assert!(last_error().contains("realify"));
    unsafe { cs_problem_free(p) };

    let q = load(EXAMPLE2);
    assert_eq!(unsafe { cs_reflection(q, 1.0, &mut r, ptr::null_mut()) }, CsStatus::InvalidInput);
    unsafe { cs_problem_free(q) };
}

#[test]
fn bad_input_is_reported() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cs_problem_from_json(ptr::null(), &mut p) }, CsStatus::NullPointer);
    let text = CString::new(r#"{"problem": {}}"#).unwrap();
    assert_eq!(unsafe { cs_problem_from_json(text.as_ptr(), &mut p) }, CsStatus::InvalidInput);
    assert!(last_error().contains("missing field"));
    assert!(p.is_null());

    let zero = CString::new(
        r#"{"problem": {"Q": {"segments": [{"interval": [0, 1], "coeffs": [0]}]},
            "V": {"segments": [{"interval": [0, 1], "coeffs": [0]}]},
            "u0": {"value": [1, 0], "derivative": [0, 0]}}}"#,
    )
    .unwrap();
    assert_eq!(unsafe { cs_problem_from_json(zero.as_ptr(), &mut p) }, CsStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { cs_disk_zero_count(p, 10.0, 0, &mut n) }, CsStatus::Degenerate);
    assert_eq!(last_error(), "b identically zero");
    assert_eq!(unsafe { cs_disk_zero_count(ptr::null(), 10.0, 0, &mut n) }, CsStatus::NullPointer);
    unsafe { cs_problem_free(p) };
    unsafe { cs_problem_free(ptr::null_mut()) };
}

#[test]
fn truncated_error_message() {
    let mut p = ptr::null_mut();
    let text = CString::new("not json").unwrap();
    assert_eq!(unsafe { cs_problem_from_json(text.as_ptr(), &mut p) }, CsStatus::InvalidInput);
    let mut buf = [1 as c_char; 4];
    let full = unsafe { cs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 4);
    assert_eq!(buf[3], 0);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/coupling_scatter.h")).unwrap();
    for name in [
        "cs_problem_from_json",
        "cs_problem_free",
        "cs_coefficients",
        "cs_transfer_matrix",
        "cs_reflection",
        "cs_disk_zero_count",
        "cs_negative_eigenvalue_count",
        "cs_last_error_message",
        "typedef struct CsProblem CsProblem",
        "CS_STATUS_DEGENERATE = 3",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
