use std::ffi::{CStr, CString};
use std::ptr;

use steklov_ffi::*;

fn generate(spec: &str) -> *mut SteklovTree {
    let spec = CString::new(spec).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { steklov_tree_generate(spec.as_ptr(), &mut t) },
        SteklovStatus::Ok
    );
    t
}

fn last_error() -> String {
    let p = steklov_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn ball_eigenvalue_and_spectrum() {
    let t = generate(r#"{"family":"BALL","D":3,"r":2}"#);
    unsafe {
        assert_eq!(steklov_tree_vertex_count(t), 10);
        assert_eq!(steklov_tree_boundary_count(t), 6);
        let mut lam = 0.0;
        assert_eq!(steklov_eigenvalue(t, 2, &mut lam), SteklovStatus::Ok);
        assert!((lam - 1.0 / 3.0).abs() < 1e-12);

        let mut written = 0;
        let mut small = [0.0; 2];
        assert_eq!(
            steklov_spectrum(t, small.as_mut_ptr(), small.len(), &mut written),
            SteklovStatus::BufferTooSmall
        );
        assert_eq!(written, 6);
        let mut buf = vec![0.0; written];
        assert_eq!(
            steklov_spectrum(t, buf.as_mut_ptr(), buf.len(), &mut written),
            SteklovStatus::Ok
        );
        assert!(buf[0].abs() < 1e-9 && (buf[1] - lam).abs() < 1e-9);
        steklov_tree_free(t);
    }
}

#[test]
fn edges_and_parse() {
    let flat: [usize; 6] = [0, 1, 1, 2, 2, 3];
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(
            steklov_tree_from_edges(flat.as_ptr(), 3, &mut t),
            SteklovStatus::Ok
        );
        let mut lam = 0.0;
        assert_eq!(steklov_eigenvalue(t, 2, &mut lam), SteklovStatus::Ok);
        assert!((lam - 2.0 / 3.0).abs() < 1e-12);
        steklov_tree_free(t);

        let text = CString::new("0 1\n0 2\n0 3\n").unwrap();
        assert_eq!(steklov_tree_parse(text.as_ptr(), &mut t), SteklovStatus::Ok);
        assert_eq!(steklov_tree_boundary_count(t), 3);
        steklov_tree_free(t);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut t = ptr::null_mut();
    unsafe {
        let cycle: [usize; 6] = [0, 1, 1, 2, 2, 0];
        assert_eq!(
            steklov_tree_from_edges(cycle.as_ptr(), 3, &mut t),
            SteklovStatus::InvalidTree
        );
        assert!(!last_error().is_empty());

        let bad = CString::new("{not json").unwrap();
        assert_eq!(
            steklov_tree_generate(bad.as_ptr(), &mut t),
            SteklovStatus::InvalidArgument
        );
        assert!(last_error().contains("family"));

        assert_eq!(
            steklov_tree_parse(ptr::null(), &mut t),
            SteklovStatus::NullPointer
        );

        let star = generate(r#"{"family":"BALL","D":4,"r":1}"#);
        let mut lam = 0.0;
        assert_eq!(
            steklov_eigenvalue(star, 9, &mut lam),
            SteklovStatus::InvalidArgument
        );
        assert_eq!(
            steklov_eigenvalue(star, 2, ptr::null_mut()),
            SteklovStatus::NullPointer
        );
        steklov_tree_free(star);
        steklov_tree_free(ptr::null_mut());
        assert_eq!(steklov_tree_vertex_count(ptr::null()), 0);
    }
}

#[test]
fn bounds_report() {
    let t = generate(r#"{"family":"PATH","L":10}"#);
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(
            steklov_bounds_json(t, ptr::null(), 0, &mut json),
            SteklovStatus::Ok
        );
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        steklov_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let diam = v["reports"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["bound_id"] == "LAM2_DIAMETER")
            .unwrap();
        assert!((diam["tightness"].as_f64().unwrap() - 1.0).abs() < 1e-9);

        let ks = [3usize, 4];
        let ball = generate(r#"{"family":"BALL","D":3,"r":3}"#);
        assert_eq!(
            steklov_bounds_json(ball, ks.as_ptr(), 2, &mut json),
            SteklovStatus::Ok
        );
        steklov_string_free(json);
        steklov_tree_free(ball);
        steklov_tree_free(t);
    }
}

#[test]
fn header_matches_exports() {
    let header = include_str!("../include/steklov.h");
    for name in [
        "steklov_last_error",
        "steklov_tree_from_edges",
        "steklov_tree_parse",
        "steklov_tree_generate",
        "steklov_tree_free",
        "steklov_eigenvalue",
        "steklov_spectrum",
        "steklov_bounds_json",
        "steklov_string_free",
        "typedef struct SteklovTree SteklovTree;",
        "STEKLOV_STATUS_BUFFER_TOO_SMALL = 5",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
