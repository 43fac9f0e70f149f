//! C ABI for the solver suite.
//!
//! Conventions:
//! - Every fallible call returns ShStatus and writes its result through
//!   an out pointer; the out value is meaningful only on `SH_STATUS_OK`.
//! - On any other status, sh_last_error_message() returns a thread-local
//!   description, valid on the calling thread until its next failing call.
//! - Handles are opaque; free each exactly once with its `_free` function.
//!   Passing NULL to a `_free` is a no-op. Accessors on NULL handles or
//!   out-of-range indices return NaN rather than faulting.
//! - All calls are panic-safe: a caught panic reports `SH_STATUS_PANIC`
//!   instead of unwinding across the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, c_int, size_t};

use semihyp::bounds::{apriori_bounds, compute_phi_psi, estimate_lipschitz, SamplingSpec};
use semihyp::blowup::{run_until_blowup, BlowupStatus};
use semihyp::problem::{validate, HyperbolicProblem};
use semihyp::solver::{solve, SolutionField, SolverOptions};

/// Result of every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ShStatus {
    /// Success; out parameters are valid.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// The problem description was rejected (sizes, parse, variables).
    BadProblem = 2,
    /// The march failed (stalled iteration, non-finite values, bad grid).
    SolveFailed = 3,
    /// A numeric argument was out of range.
    BadInput = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Verdict of sh_run_blowup().
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ShBlowupStatus {
    /// The march reached the requested horizon below the cap.
    Completed = 0,
    /// The sup-norm cap was exceeded or the slab widths collapsed.
    Detected = 1,
    /// The iteration stopped without a verdict.
    Inconclusive = 2,
}

/// Plain-data result of sh_run_blowup().
#[repr(C)]
pub struct ShBlowupResult {
    pub status: ShBlowupStatus,
    /// Last committed time.
    pub reached_t: f64,
    /// Extrapolated blow-up time; NaN when not estimated.
    pub t_star: f64,
    /// Largest |u| seen.
    pub peak: f64,
    /// Committed slab count.
    pub slabs: size_t,
}

/// Opaque problem handle.
pub struct ShProblem {
    inner: HyperbolicProblem,
}

/// Opaque solution handle.
pub struct ShField {
    inner: SolutionField,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = clean);
}

fn fail(status: ShStatus, msg: &str) -> ShStatus {
    set_error(msg);
    status
}

fn guard<F: FnOnce() -> ShStatus>(body: F) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => fail(ShStatus::Panic, "internal panic caught at the C boundary"),
    }
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sh_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Description of the last failure on this thread. Never NULL; empty before
/// the first failure. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_strs(
    what: &str,
    arr: *const *const c_char,
    n: usize,
) -> Result<Vec<String>, (ShStatus, String)> {
    if arr.is_null() {
        return Err((ShStatus::NullArgument, format!("{what} array is NULL")));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = *arr.add(i);
        if p.is_null() {
            return Err((
                ShStatus::NullArgument,
                format!("{what}[{i}] is NULL"),
            ));
        }
        match CStr::from_ptr(p).to_str() {
            Ok(s) => out.push(s.to_string()),
            Err(_) => {
                return Err((ShStatus::Utf8, format!("{what}[{i}] is not valid UTF-8")))
            }
        }
    }
    Ok(out)
}

/// Build a problem from `n` expressions per family. `lambda` are speeds in
/// (x, t); `f` interior terms in (x, t, u1..un); `phi` initial data in (x);
/// `h` boundary terms in (t, v1..vn). Components 1..k must have negative
/// speeds, the rest positive. On success `*out` owns the handle.
///
/// # Safety
/// The array arguments must point to `n` valid NUL-terminated strings each,
/// and `out` must be a valid location to store a pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_problem_parse(
    n: size_t,
    k: size_t,
    lambda: *const *const c_char,
    f: *const *const c_char,
    phi: *const *const c_char,
    h: *const *const c_char,
    out: *mut *mut ShProblem,
) -> ShStatus {
    guard(|| {
        if out.is_null() {
            return fail(ShStatus::NullArgument, "out pointer is NULL");
        }
        let read = |what, arr| read_strs(what, arr, n);
        let (lambda, f, phi, h) = match (
            read("lambda", lambda),
            read("f", f),
            read("phi", phi),
            read("h", h),
        ) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
            (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (_, _, _, Err(e)) => {
                return fail(e.0, &e.1)
            }
        };
        match HyperbolicProblem::from_strs(n, k, &lambda, &f, &phi, &h) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(ShProblem { inner: p }));
                ShStatus::Ok
            }
            Err(e) => fail(ShStatus::BadProblem, &e.to_string()),
        }
    })
}

/// # Safety
/// `p` must be a pointer returned by sh_problem_parse() that has not been
/// freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_problem_free(p: *mut ShProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of components n.
///
/// # Safety
/// `p` must be a live problem handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sh_problem_num_components(p: *const ShProblem) -> size_t {
    p.as_ref().map(|p| p.inner.n).unwrap_or(0)
}

/// Check the fixed-sign convention and symbolic differentiability over
/// [0,1] x [0,t_max]. Writes 1 to `*pass` when every check holds.
///
/// # Safety
/// `p` must be a live problem handle; `pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sh_problem_validate(
    p: *const ShProblem,
    t_max: f64,
    pass: *mut c_int,
) -> ShStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), pass.is_null()) else {
            return fail(ShStatus::NullArgument, "problem or out pointer is NULL");
        };
        if !(t_max > 0.0) || !t_max.is_finite() {
            return fail(ShStatus::BadInput, "t_max must be positive and finite");
        }
        let report = validate(&p.inner, t_max, 21);
        *pass = report.pass as c_int;
        ShStatus::Ok
    })
}

fn auto_box(p: &HyperbolicProblem, t: f64) -> Result<semihyp::bounds::LipschitzEstimate, String> {
    let spec = SamplingSpec::default();
    let lip0 = estimate_lipschitz(p, t, 1.0, &spec).map_err(|e| e.to_string())?;
    let pp0 = compute_phi_psi(p, t, 1.0, &spec).map_err(|e| e.to_string())?;
    let rep0 = apriori_bounds(p, &lip0, t, &pp0);
    let s = rep0.m_suggested.value;
    let m = if s.is_finite() && s > 0.0 { s } else { 1e12 };
    estimate_lipschitz(p, t, m.clamp(1.0, 1e12), &spec).map_err(|e| e.to_string())
}

/// March the problem to `t_final` on `nx` spatial intervals. Pass a nonzero
/// `derivatives` to also march the x-derivative system. On success `*out`
/// owns the solution handle.
///
/// # Safety
/// `p` must be a live problem handle and `out` a valid location to store a
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_solve(
    p: *const ShProblem,
    nx: size_t,
    t_final: f64,
    derivatives: c_int,
    out: *mut *mut ShField,
) -> ShStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out.is_null()) else {
            return fail(ShStatus::NullArgument, "problem or out pointer is NULL");
        };
        if !(t_final > 0.0) || !t_final.is_finite() {
            return fail(ShStatus::BadInput, "t_final must be positive and finite");
        }
        let lip = match auto_box(&p.inner, t_final) {
            Ok(l) => l,
            Err(e) => return fail(ShStatus::SolveFailed, &e),
        };
        let opts = SolverOptions::default();
        match solve(&p.inner, nx, t_final, &lip, &opts, derivatives != 0) {
            Ok((field, _report)) => {
                *out = Box::into_raw(Box::new(ShField { inner: field }));
                ShStatus::Ok
            }
            Err(e) => fail(ShStatus::SolveFailed, &e.to_string()),
        }
    })
}

/// # Safety
/// `f` must be a pointer returned by sh_solve() that has not been freed,
/// or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_free(f: *mut ShField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of stored time levels (level 0 is the initial data).
///
/// # Safety
/// `f` must be a live field handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sh_field_num_levels(f: *const ShField) -> size_t {
    f.as_ref().map(|f| f.inner.times.len()).unwrap_or(0)
}

/// Number of spatial nodes (nx + 1).
///
/// # Safety
/// `f` must be a live field handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sh_field_num_nodes(f: *const ShField) -> size_t {
    f.as_ref().map(|f| f.inner.xs.len()).unwrap_or(0)
}

/// Number of solution components.
///
/// # Safety
/// `f` must be a live field handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sh_field_num_components(f: *const ShField) -> size_t {
    f.as_ref().map(|f| f.inner.n_comps()).unwrap_or(0)
}

/// Time of one level; NaN when out of range.
///
/// # Safety
/// `f` must be a live field handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_time(f: *const ShField, level: size_t) -> f64 {
    f.as_ref()
        .and_then(|f| f.inner.times.get(level).copied())
        .unwrap_or(f64::NAN)
}

/// Coordinate of one node; NaN when out of range.
///
/// # Safety
/// `f` must be a live field handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_x(f: *const ShField, node: size_t) -> f64 {
    f.as_ref()
        .and_then(|f| f.inner.xs.get(node).copied())
        .unwrap_or(f64::NAN)
}

unsafe fn levels<'a>(
    f: *const ShField,
    which: c_int,
) -> Option<&'a Vec<Vec<Vec<f64>>>> {
    let f = f.as_ref()?;
    match which {
        0 => Some(&f.inner.u),
        1 => f.inner.dudx.as_ref(),
        2 => f.inner.dudt.as_ref(),
        _ => None,
    }
}

/// One sampled value u_comp(x_node, t_level); components are 0-based here.
/// NaN when any index is out of range.
///
/// # Safety
/// `f` must be a live field handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_value(
    f: *const ShField,
    level: size_t,
    comp: size_t,
    node: size_t,
) -> f64 {
    lookup(f, 0, level, comp, node)
}

/// du/dx at one sample; NaN unless the solve requested derivatives.
///
/// # Safety
/// `f` must be a live field handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_dx_value(
    f: *const ShField,
    level: size_t,
    comp: size_t,
    node: size_t,
) -> f64 {
    lookup(f, 1, level, comp, node)
}

/// du/dt at one sample; NaN unless the solve requested derivatives.
///
/// # Safety
/// `f` must be a live field handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_dt_value(
    f: *const ShField,
    level: size_t,
    comp: size_t,
    node: size_t,
) -> f64 {
    lookup(f, 2, level, comp, node)
}

unsafe fn lookup(f: *const ShField, which: c_int, level: size_t, comp: size_t, node: size_t) -> f64 {
    levels(f, which)
        .and_then(|lv| lv.get(level))
        .and_then(|l| l.get(comp))
        .and_then(|c| c.get(node).copied())
        .unwrap_or(f64::NAN)
}

/// Largest |u| over the whole grid; NaN on NULL.
///
/// # Safety
/// `f` must be a live field handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sh_field_sup_abs(f: *const ShField) -> f64 {
    f.as_ref().map(|f| f.inner.sup_abs_u()).unwrap_or(f64::NAN)
}

/// Write the wide-format CSV (one row per node and level) to `path`.
///
/// # Safety
/// `f` must be a live field handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sh_field_write_csv(
    f: *const ShField,
    path: *const c_char,
) -> ShStatus {
    guard(|| {
        let (Some(f), false) = (f.as_ref(), path.is_null()) else {
            return fail(ShStatus::NullArgument, "field or path is NULL");
        };
        let path = match CStr::from_ptr(path).to_str() {
            Ok(s) => s,
            Err(_) => return fail(ShStatus::Utf8, "path is not valid UTF-8"),
        };
        let file = match std::fs::File::create(path) {
            Ok(w) => w,
            Err(e) => return fail(ShStatus::BadInput, &format!("cannot create {path}: {e}")),
        };
        let mut w = std::io::BufWriter::new(file);
        match f.inner.write_csv(&mut w) {
            Ok(()) => ShStatus::Ok,
            Err(e) => fail(ShStatus::SolveFailed, &format!("cannot write {path}: {e}")),
        }
    })
}

/// March with dynamic range re-sizing until |u| exceeds `u_max`, the slab
/// widths collapse, or `t_max` is reached. Fills `*result` on success.
///
/// # Safety
/// `p` must be a live problem handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn sh_run_blowup(
    p: *const ShProblem,
    u_max: f64,
    t_max: f64,
    nx: size_t,
    result: *mut ShBlowupResult,
) -> ShStatus {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), result.is_null()) else {
            return fail(ShStatus::NullArgument, "problem or result pointer is NULL");
        };
        match run_until_blowup(&p.inner, u_max, t_max, nx) {
            Ok(v) => {
                *result = ShBlowupResult {
                    status: match v.status {
                        BlowupStatus::Completed => ShBlowupStatus::Completed,
                        BlowupStatus::BlowupDetected => ShBlowupStatus::Detected,
                        BlowupStatus::Inconclusive => ShBlowupStatus::Inconclusive,
                    },
                    reached_t: v.reached_t,
                    t_star: v.t_star.unwrap_or(f64::NAN),
                    peak: v.peak,
                    slabs: v.slabs,
                };
                ShStatus::Ok
            }
            Err(e) => fail(ShStatus::SolveFailed, &e.to_string()),
        }
    })
}
