use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use couette_lab_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { couette_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn field(nz: usize, nv: usize, lv: f64) -> *mut CouetteField {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { couette_field_new(nz, nv, lv, &mut f) }, CouetteStatus::Ok);
    assert!(!f.is_null());
    f
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(couette_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn field_modes_round_trip_with_conjugate() {
    let f = field(16, 16, 1.0);
    unsafe {
        assert_eq!(couette_field_set_mode(f, 1, 2, 0.5, -0.25), CouetteStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(couette_field_get_mode(f, -1, -2, &mut re, &mut im), CouetteStatus::Ok);
        assert_eq!((re, im), (0.5, 0.25));
        let mut n = 0.0;
        assert_eq!(couette_field_l2_norm(f, &mut n), CouetteStatus::Ok);
        assert!(n > 0.0);
        assert_eq!(couette_field_set_mode(f, 100, 0, 1.0, 0.0), CouetteStatus::InvalidParameter);
        assert!(last_error().contains("outside"));
        couette_field_free(f);
    }
}

#[test]
fn linear_evolution_matches_viscous_factor() {
    let f = field(16, 16, 1.0);
    let (k, j, nu, t) = (1i64, 3i64, 1e-2, 2.0);
    unsafe {
        couette_field_set_mode(f, k, j, 1.0, 0.0);
        let mut g = ptr::null_mut();
        assert_eq!(couette_linear_evolve(f, t, nu, &mut g), CouetteStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        couette_field_get_mode(g, k, j, &mut re, &mut im);
        // eta = j / lv with lv = 1
        let expect = (-nu * couette_viscous_integral(k, j as f64, 0.0, t)).exp();
        assert!((re - expect).abs() < 1e-14 && im.abs() < 1e-14, "{re} {expect}");
        couette_field_free(g);
        couette_field_free(f);
    }
}

#[test]
fn null_and_bad_arguments_are_reported() {
    unsafe {
        let mut n = 0.0;
        assert_eq!(couette_field_l2_norm(ptr::null(), &mut n), CouetteStatus::NullPointer);
        let mut f = ptr::null_mut();
        assert_eq!(couette_field_new(0, 8, 1.0, &mut f), CouetteStatus::GridIncompatible);
        assert!(f.is_null());
        assert!(!last_error().is_empty());
        let mut w = ptr::null_mut();
        assert_eq!(couette_weights_new(0.2, 2.0, &mut w), CouetteStatus::InvalidParameter);
        let bad = CString::new("{ not json").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(couette_sim_new(bad.as_ptr(), &mut s), CouetteStatus::Config);
        couette_field_free(ptr::null_mut());
        couette_sim_free(ptr::null_mut());
        couette_weights_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates_and_reports_length() {
    unsafe {
        let mut n = 0.0;
        couette_field_l2_norm(ptr::null(), &mut n);
        let full = couette_last_error(ptr::null_mut(), 0);
        let mut buf = [1 as c_char; 4];
        assert_eq!(couette_last_error(buf.as_mut_ptr(), 4), full);
        assert_eq!(buf[3], 0);
    }
}

#[test]
fn weights_are_finite_and_decrease_in_time_below_critical() {
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(couette_weights_new(0.25, 1e-3, &mut w), CouetteStatus::Ok);
        let (mut a0, mut a1) = (0.0, 0.0);
        assert_eq!(couette_weights_log_a(w, 0.0, 1, 50.0, &mut a0), CouetteStatus::Ok);
        assert_eq!(couette_weights_log_a(w, 10.0, 1, 50.0, &mut a1), CouetteStatus::Ok);
        assert!(a0.is_finite() && a1.is_finite());
        couette_weights_free(w);
    }
}

#[test]
fn simulation_advances_and_exposes_state() {
    let cfg = CString::new(
        r#"{"grid":{"nz":24,"nv":24,"lv":1.0},"nu":1e-2,"beta":0.3333333333333333,
            "t_final":1.0,"dt_max":0.1,"diag_every":1.0,"energy":false,
            "init":{"epsilon":1e-2,"seed":3}}"#,
    )
    .unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(couette_sim_new(cfg.as_ptr(), &mut s), CouetteStatus::Ok, "{}", last_error());
        let mut n0 = 0.0;
        couette_sim_status(s, ptr::null_mut(), ptr::null_mut(), &mut n0);
        assert_eq!(couette_sim_advance_to(s, 0.5), CouetteStatus::Ok);
        let (mut t, mut steps, mut n1) = (0.0, 0u64, 0.0);
        assert_eq!(couette_sim_status(s, &mut t, &mut steps, &mut n1), CouetteStatus::Ok);
        assert!((t - 0.5).abs() < 1e-12 && steps >= 5);
        assert!(n1 > 0.0 && n1 < n0);
        let mut f = ptr::null_mut();
        assert_eq!(couette_sim_field(s, &mut f), CouetteStatus::Ok);
        couette_field_free(f);
        couette_sim_free(s);
    }
}

#[test]
fn header_declares_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/couette_lab.h")).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct CouetteField CouetteField;"));
    assert!(header.contains("COUETTE_STATUS_PANIC = 8"));
    // the header must be valid C when a compiler is around
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(dir.join("include/couette_lab.h")).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
