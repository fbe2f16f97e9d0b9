use std::ffi::{CStr, CString};
use std::ptr;

use kerrslab::cli::SolutionDocument;
use kerrslab_ffi::*;

const DELTA: f64 = 0.25 / std::f64::consts::PI;

fn last_error() -> String {
    let p = ks_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn problem(alpha: f64) -> *mut KsProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ks_problem_new(1.0, 0.0, DELTA, alpha, 1.0, 0.0, &mut p) }, KsStatus::Ok);
    p
}

#[test]
fn vacuum_is_transparent() {
    let p = problem(0.0);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ks_solve(p, &mut s) }, KsStatus::Ok);
    let mut sum = KsSummary::default();
    assert_eq!(unsafe { ks_solution_summary(s, &mut sum) }, KsStatus::Ok);
    assert!(sum.converged);
    assert_eq!(sum.iterations, 1);
    assert_eq!(sum.reflectance, 0.0);
    assert_eq!(unsafe { ks_solution_len(s) }, 1025);
    unsafe {
        ks_solution_free(s);
        ks_problem_free(p);
    }
}

#[test]
fn sampled_profile_and_field_copy() {
    let p = problem(0.02);
    let re = vec![1.5; 65];
    let im = vec![0.02; 65];
    unsafe {
        assert_eq!(ks_problem_set_permittivity_samples(p, re.as_ptr(), im.as_ptr(), re.len()), KsStatus::Ok);
        assert_eq!(ks_problem_set_grid(p, 257), KsStatus::Ok);
        assert_eq!(ks_problem_set_solver(p, KsScheme::Coupled, 1e-11, 100), KsStatus::Ok);
        let mut chk = KsCheckSummary::default();
        assert_eq!(ks_check(p, &mut chk), KsStatus::Ok);
        assert_eq!(chk.real_satisfied, -1);
        assert!(chk.complex_satisfied);

        let mut s = ptr::null_mut();
        assert_eq!(ks_solve(p, &mut s), KsStatus::Ok);
        let n = ks_solution_len(s);
        let (mut z, mut ur, mut ui) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        assert_eq!(ks_solution_field(s, z.as_mut_ptr(), ur.as_mut_ptr(), ui.as_mut_ptr(), n), KsStatus::Ok);
        assert!((z[0] + 0.5).abs() < 1e-15 && (z[n - 1] - 0.5).abs() < 1e-15);
        let mut sum = KsSummary::default();
        ks_solution_summary(s, &mut sum);
        assert!(sum.deficit > 0.0);
        assert!((ui[0] - sum.b_scat_im).abs() < 1e-9);
        assert_eq!(ks_solution_field(s, ptr::null_mut(), ur.as_mut_ptr(), ptr::null_mut(), n - 1), KsStatus::InvalidArgument);
        ks_solution_free(s);
        ks_problem_free(p);
    }
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    let status = unsafe { ks_problem_new(-1.0, 0.0, DELTA, 0.0, 1.0, 0.0, &mut p) };
    assert_eq!(status, KsStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().contains("kappa"));

    assert_eq!(unsafe { ks_problem_new(1.0, 0.0, DELTA, 0.0, 1.0, 0.0, ptr::null_mut()) }, KsStatus::NullPointer);
    assert_eq!(unsafe { ks_problem_set_grid(ptr::null_mut(), 5) }, KsStatus::NullPointer);

    let p = problem(0.05);
    unsafe {
        assert_eq!(ks_problem_set_grid(p, 4), KsStatus::InvalidArgument);
        assert_eq!(ks_problem_set_solver(p, KsScheme::Picard, -1.0, 10), KsStatus::InvalidArgument);
        assert_eq!(ks_problem_set_permittivity_constant(p, f64::NAN, 0.0), KsStatus::InvalidArgument);
        // A successful call clears the message.
        assert_eq!(ks_problem_set_grid(p, 33), KsStatus::Ok);
        assert!(ks_last_error().is_null());
        ks_problem_free(p);
    }
}

#[test]
fn non_convergence_still_yields_a_solution() {
    let p = problem(0.05);
    unsafe {
        ks_problem_set_permittivity_constant(p, 1.5, 0.0);
        ks_problem_set_grid(p, 129);
        ks_problem_set_solver(p, KsScheme::Picard, 1e-10, 2);
        let mut s = ptr::null_mut();
        assert_eq!(ks_solve(p, &mut s), KsStatus::NotConverged);
        assert!(!s.is_null());
        let mut sum = KsSummary::default();
        ks_solution_summary(s, &mut sum);
        assert!(!sum.converged);
        assert_eq!(sum.iterations, 2);
        ks_solution_free(s);

        ks_problem_set_permittivity_constant(p, 3.2, 0.0);
        ks_problem_set_solver(p, KsScheme::Picard, 1e-10, 500);
        let mut s = ptr::null_mut();
        assert_eq!(ks_solve(p, &mut s), KsStatus::Diverged);
        assert!(s.is_null());
        ks_problem_free(p);
    }
}

#[test]
fn config_json_round_trip() {
    let cfg = CString::new(
        r#"{"schema": "kerrslab.run/v1",
            "problem": {"kappa": 1.0, "phi_angle": 0.0, "delta": 0.07957747154594767, "alpha": 0.05, "a_inc": 1.0},
            "profile": {"kind": "constant", "value": 1.5},
            "grid_n": 129}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ks_run_config_json(cfg.as_ptr(), &mut out) }, KsStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { ks_string_free(out) };
    let doc = SolutionDocument::parse(&text).unwrap();
    assert!(doc.converged);
    assert_eq!(doc.grid_n, 129);

    let bad = CString::new(r#"{"schema": "kerrslab.run/v1", "grid_n": 5}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ks_run_config_json(bad.as_ptr(), &mut out) }, KsStatus::Config);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(ks_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
