//! Exercises the C entry points exactly as a C caller would: NUL-terminated
//! strings, out pointers, status codes, and manual frees.

use std::ffi::{CStr, CString};
use std::ptr;

use libc::c_char;
use semihyp_capi::*;

fn cstrings(srcs: &[&str]) -> (Vec<CString>, Vec<*const c_char>) {
    let owned: Vec<CString> = srcs.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const c_char> = owned.iter().map(|c| c.as_ptr()).collect();
    (owned, ptrs)
}

fn parse_problem(lambda: &[&str], f: &[&str], phi: &[&str], h: &[&str]) -> *mut ShProblem {
    let (_l, lp) = cstrings(lambda);
    let (_f, fp) = cstrings(f);
    let (_p, pp) = cstrings(phi);
    let (_h, hp) = cstrings(h);
    let mut out: *mut ShProblem = ptr::null_mut();
    let status = unsafe {
        sh_problem_parse(
            lambda.len(),
            1,
            lp.as_ptr(),
            fp.as_ptr(),
            pp.as_ptr(),
            hp.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(status, ShStatus::Ok, "{}", last_error());
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(sh_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(sh_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_validate_solve_and_read_back() {
    let p = parse_problem(
        &["-1", "1"],
        &["0", "0"],
        &["1", "1"],
        &["v2", "v1"],
    );

    let mut pass = 0;
    let status = unsafe { sh_problem_validate(p, 1.0, &mut pass) };
    assert_eq!(status, ShStatus::Ok);
    assert_eq!(pass, 1);
    assert_eq!(unsafe { sh_problem_num_components(p) }, 2);

    let mut field: *mut ShField = ptr::null_mut();
    let status = unsafe { sh_solve(p, 20, 1.0, 0, &mut field) };
    assert_eq!(status, ShStatus::Ok, "{}", last_error());

    unsafe {
        let levels = sh_field_num_levels(field);
        let nodes = sh_field_num_nodes(field);
        assert!(levels >= 2);
        assert_eq!(nodes, 21);
        assert_eq!(sh_field_num_components(field), 2);
        assert_eq!(sh_field_time(field, 0), 0.0);
        assert_eq!(sh_field_x(field, 0), 0.0);
        assert_eq!(sh_field_x(field, nodes - 1), 1.0);
        // the constant problem stays exactly 1 everywhere
        assert_eq!(sh_field_value(field, 0, 0, 3), 1.0);
        assert_eq!(sh_field_value(field, levels - 1, 1, 10), 1.0);
        assert_eq!(sh_field_sup_abs(field), 1.0);
        // derivatives were not requested
        assert!(sh_field_dx_value(field, 0, 0, 0).is_nan());
        // out-of-range indices answer NaN, never fault
        assert!(sh_field_value(field, levels + 7, 0, 0).is_nan());
        assert!(sh_field_value(field, 0, 9, 0).is_nan());
        assert!(sh_field_time(field, usize::MAX).is_nan());
    }

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(
        dir.path()
            .join("field.csv")
            .to_str()
            .unwrap(),
    )
    .unwrap();
    let status = unsafe { sh_field_write_csv(field, path.as_ptr()) };
    assert_eq!(status, ShStatus::Ok, "{}", last_error());
    let written = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert!(written.starts_with("x,t,u1,u2"), "{written}");

    unsafe {
        sh_field_free(field);
        sh_problem_free(p);
        // NULL frees are no-ops
        sh_field_free(ptr::null_mut());
        sh_problem_free(ptr::null_mut());
    }
}

#[test]
fn solve_with_derivatives_exposes_them() {
    let p = parse_problem(
        &["-1", "1"],
        &["0", "0"],
        &["x", "1 - x"],
        &["exp(-t)", "exp(-t)"],
    );
    let mut field: *mut ShField = ptr::null_mut();
    let status = unsafe { sh_solve(p, 20, 0.5, 1, &mut field) };
    assert_eq!(status, ShStatus::Ok, "{}", last_error());
    unsafe {
        // phi_1 = x has slope 1 at t = 0
        let d = sh_field_dx_value(field, 0, 0, 5);
        assert!((d - 1.0).abs() < 1e-9, "d = {d}");
        assert!(sh_field_dt_value(field, 0, 0, 5).is_finite());
        sh_field_free(field);
        sh_problem_free(p);
    }
}

#[test]
fn errors_set_status_and_message() {
    // unparseable expression
    let (_l, lp) = cstrings(&["-1", "1"]);
    let (_f, fp) = cstrings(&["u1*", "0"]);
    let (_p, pp) = cstrings(&["0", "0"]);
    let (_h, hp) = cstrings(&["v2", "v1"]);
    let mut out: *mut ShProblem = ptr::null_mut();
    let status = unsafe {
        sh_problem_parse(2, 1, lp.as_ptr(), fp.as_ptr(), pp.as_ptr(), hp.as_ptr(), &mut out)
    };
    assert_eq!(status, ShStatus::BadProblem);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    // NULL array
    let status = unsafe {
        sh_problem_parse(2, 1, ptr::null(), fp.as_ptr(), pp.as_ptr(), hp.as_ptr(), &mut out)
    };
    assert_eq!(status, ShStatus::NullArgument);
    assert!(last_error().contains("lambda"), "{}", last_error());

    // bad numeric input to solve
    let p = parse_problem(&["-1", "1"], &["0", "0"], &["1", "1"], &["v2", "v1"]);
    let mut field: *mut ShField = ptr::null_mut();
    let status = unsafe { sh_solve(p, 20, -1.0, 0, &mut field) };
    assert_eq!(status, ShStatus::BadInput);
    assert!(field.is_null());
    unsafe { sh_problem_free(p) };
}

#[test]
fn blowup_locates_the_quadratic_pole() {
    let p = parse_problem(
        &["-1", "1"],
        &["u1*u1", "u2*u2"],
        &["1", "1"],
        &["v2", "v1"],
    );
    let mut res = ShBlowupResult {
        status: ShBlowupStatus::Inconclusive,
        reached_t: 0.0,
        t_star: 0.0,
        peak: 0.0,
        slabs: 0,
    };
    let status = unsafe { sh_run_blowup(p, 1e4, 2.0, 30, &mut res) };
    assert_eq!(status, ShStatus::Ok, "{}", last_error());
    assert_eq!(res.status, ShBlowupStatus::Detected);
    assert!(res.reached_t < 1.0);
    assert!((res.t_star - 1.0).abs() < 0.1, "t_star = {}", res.t_star);
    assert!(res.peak >= 1e4);
    assert!(res.slabs > 10);
    unsafe { sh_problem_free(p) };
}

#[test]
fn generated_header_covers_the_surface() {
    let header = include_str!("../include/semihyp.h");
    for symbol in [
        "sh_version",
        "sh_last_error_message",
        "sh_problem_parse",
        "sh_problem_free",
        "sh_problem_validate",
        "sh_problem_num_components",
        "sh_solve",
        "sh_field_free",
        "sh_field_num_levels",
        "sh_field_num_nodes",
        "sh_field_num_components",
        "sh_field_time",
        "sh_field_x",
        "sh_field_value",
        "sh_field_dx_value",
        "sh_field_dt_value",
        "sh_field_sup_abs",
        "sh_field_write_csv",
        "sh_run_blowup",
        "typedef struct ShProblem ShProblem",
        "typedef struct ShField ShField",
        "SH_STATUS_OK",
        "SH_BLOWUP_STATUS_DETECTED",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
