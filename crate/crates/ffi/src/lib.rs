//! C ABI for the Kerr-slab solver.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `_free`. Every fallible call returns a [`KsStatus`] and, on
//! failure, stores a message readable through [`ks_last_error`] on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kerrslab::cli::solve_config;
use kerrslab::config::RunConfig;
use kerrslab::contraction::check_all;
use kerrslab::solver::{flux_balance, solve, IterationTrace, Scheme, SolveOptions};
use kerrslab::{Complex64, Error, FieldSolution, Grid, PermittivityProfile, ProblemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The solution handle is still produced and must be freed.
    NotConverged = 3,
    Diverged = 4,
    Singular = 5,
    Config = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsScheme {
    Picard = 0,
    Coupled = 1,
}

/// Scalar results of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KsSummary {
    pub a_scat_re: f64,
    pub a_scat_im: f64,
    pub b_scat_re: f64,
    pub b_scat_im: f64,
    pub reflectance: f64,
    pub transmittance: f64,
    pub deficit: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sufficient-condition outcome. `real_satisfied` is -1 for complex profiles;
/// `t_factor` is NaN when no rate is guaranteed.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KsCheckSummary {
    pub any_satisfied: bool,
    pub real_satisfied: i32,
    pub complex_satisfied: bool,
    pub weak_satisfied: bool,
    pub t_factor: f64,
}

pub struct KsProblem {
    params: ProblemParams,
    profile: PermittivityProfile,
    grid_n: usize,
    opts: SolveOptions,
}

pub struct KsSolution {
    solution: FieldSolution,
    trace: IterationTrace,
    params: ProblemParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> KsStatus {
    match e {
        Error::Domain(_) | Error::LengthMismatch { .. } | Error::ExcludedFrequency { .. } => KsStatus::InvalidArgument,
        Error::Diverged { .. } => KsStatus::Diverged,
        Error::NearSingular { .. } | Error::Singular { .. } => KsStatus::Singular,
        Error::NewtonNotConverged { .. } => KsStatus::NotConverged,
    }
}

fn fail(status: KsStatus, message: impl Into<String>) -> KsStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> KsStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`KsStatus::Panic`].
fn guard(f: impl FnOnce() -> KsStatus) -> KsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(KsStatus::Panic, "internal panic"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library.
#[no_mangle]
pub extern "C" fn ks_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ks_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a problem with vacuum permittivity and 1025 grid nodes.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ks_problem_new(
    kappa: f64,
    phi_angle: f64,
    delta: f64,
    alpha: f64,
    a_inc_re: f64,
    a_inc_im: f64,
    out: *mut *mut KsProblem,
) -> KsStatus {
    guard(|| {
        if out.is_null() {
            return fail(KsStatus::NullPointer, "out is null");
        }
        let params = match ProblemParams::new(kappa, phi_angle, delta, alpha, Complex64::new(a_inc_re, a_inc_im)) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let profile = match PermittivityProfile::real_constant(1.0, params.d()) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let problem = KsProblem { params, profile, grid_n: 1025, opts: SolveOptions::default() };
        *out = Box::into_raw(Box::new(problem));
        KsStatus::Ok
    })
}

/// # Safety
/// `problem` must be null or a handle from [`ks_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_problem_free(problem: *mut KsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

unsafe fn problem_mut<'a>(problem: *mut KsProblem) -> Result<&'a mut KsProblem, KsStatus> {
    problem.as_mut().ok_or_else(|| fail(KsStatus::NullPointer, "problem is null"))
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_problem_set_permittivity_constant(problem: *mut KsProblem, re: f64, im: f64) -> KsStatus {
    guard(|| {
        let p = match problem_mut(problem) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match PermittivityProfile::constant(Complex64::new(re, im), p.params.d()) {
            Ok(profile) => {
                p.profile = profile;
                KsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Samples on a uniform closed grid over the layer. `im` may be null for a
/// real profile.
///
/// # Safety
/// `problem` must be a live handle; `re` (and `im` when non-null) must point
/// to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ks_problem_set_permittivity_samples(
    problem: *mut KsProblem,
    re: *const f64,
    im: *const f64,
    len: usize,
) -> KsStatus {
    guard(|| {
        let p = match problem_mut(problem) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if re.is_null() {
            return fail(KsStatus::NullPointer, "re is null");
        }
        let re = std::slice::from_raw_parts(re, len);
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        match PermittivityProfile::sampled(values, p.params.d()) {
            Ok(profile) => {
                p.profile = profile;
                KsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// `n` must be odd and at least 3.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_problem_set_grid(problem: *mut KsProblem, n: usize) -> KsStatus {
    guard(|| {
        let p = match problem_mut(problem) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Grid::new(n, p.params.d()) {
            Ok(_) => {
                p.grid_n = n;
                KsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_problem_set_solver(
    problem: *mut KsProblem,
    scheme: KsScheme,
    tol: f64,
    max_iters: usize,
) -> KsStatus {
    guard(|| {
        let p = match problem_mut(problem) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let opts = SolveOptions {
            scheme: match scheme {
                KsScheme::Picard => Scheme::Picard,
                KsScheme::Coupled => Scheme::Coupled,
            },
            tol,
            max_iters,
            ..p.opts
        };
        match opts.validate() {
            Ok(()) => {
                p.opts = opts;
                KsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Solves the problem. On [`KsStatus::Ok`] and [`KsStatus::NotConverged`]
/// `*out` receives a solution handle.
///
/// # Safety
/// `problem` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ks_solve(problem: *const KsProblem, out: *mut *mut KsSolution) -> KsStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(KsStatus::NullPointer, "problem is null");
        };
        if out.is_null() {
            return fail(KsStatus::NullPointer, "out is null");
        }
        let grid = match Grid::new(p.grid_n, p.params.d()) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        let (solution, trace) = match solve(&p.params, &p.profile, &grid, &p.opts) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let converged = trace.converged;
        let iters = trace.iters_used;
        *out = Box::into_raw(Box::new(KsSolution { solution, trace, params: p.params }));
        if converged {
            KsStatus::Ok
        } else {
            fail(KsStatus::NotConverged, format!("not converged after {iters} iterations"))
        }
    })
}

/// # Safety
/// `solution` must be null or a handle from [`ks_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_solution_free(solution: *mut KsSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of field samples, or 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_solution_len(solution: *const KsSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solution.u.len())
}

/// Copies nodes and field samples; any output pointer may be null.
///
/// # Safety
/// `solution` must be a live handle; non-null outputs must hold `len` doubles,
/// with `len` equal to [`ks_solution_len`].
#[no_mangle]
pub unsafe extern "C" fn ks_solution_field(
    solution: *const KsSolution,
    z: *mut f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> KsStatus {
    guard(|| {
        let Some(s) = solution.as_ref() else {
            return fail(KsStatus::NullPointer, "solution is null");
        };
        let u = &s.solution.u;
        if len != u.len() {
            return fail(KsStatus::InvalidArgument, format!("len is {len}, the solution has {} samples", u.len()));
        }
        let nodes = s.solution.grid.nodes();
        for k in 0..len {
            if !z.is_null() {
                *z.add(k) = nodes[k];
            }
            if !re.is_null() {
                *re.add(k) = u[k].re;
            }
            if !im.is_null() {
                *im.add(k) = u[k].im;
            }
        }
        KsStatus::Ok
    })
}

/// # Safety
/// `solution` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ks_solution_summary(solution: *const KsSolution, out: *mut KsSummary) -> KsStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), out.is_null()) else {
            return fail(KsStatus::NullPointer, "solution or out is null");
        };
        let flux = flux_balance(&s.solution, &s.params);
        *out = KsSummary {
            a_scat_re: s.solution.a_scat.re,
            a_scat_im: s.solution.a_scat.im,
            b_scat_re: s.solution.b_scat.re,
            b_scat_im: s.solution.b_scat.im,
            reflectance: flux.reflectance,
            transmittance: flux.transmittance,
            deficit: flux.deficit,
            residual: s.solution.residual,
            iterations: s.trace.iters_used,
            converged: s.trace.converged,
        };
        KsStatus::Ok
    })
}

/// # Safety
/// `problem` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ks_check(problem: *const KsProblem, out: *mut KsCheckSummary) -> KsStatus {
    guard(|| {
        let (Some(p), false) = (problem.as_ref(), out.is_null()) else {
            return fail(KsStatus::NullPointer, "problem or out is null");
        };
        let report = match Grid::new(p.grid_n, p.params.d()).and_then(|g| check_all(&p.params, &p.profile, &g)) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let rate = report
            .real
            .as_ref()
            .filter(|r| r.satisfied)
            .or(Some(&report.complex).filter(|r| r.satisfied))
            .and_then(|r| r.t_factor);
        *out = KsCheckSummary {
            any_satisfied: report.any_satisfied,
            real_satisfied: report.real.as_ref().map_or(-1, |r| i32::from(r.satisfied)),
            complex_satisfied: report.complex.satisfied,
            weak_satisfied: report.weak.satisfied,
            t_factor: rate.unwrap_or(f64::NAN),
        };
        KsStatus::Ok
    })
}

/// Solves a JSON run configuration and returns the solution document as a
/// JSON string, to be released with [`ks_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out_json` valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn ks_run_config_json(config_json: *const c_char, out_json: *mut *mut c_char) -> KsStatus {
    guard(|| {
        if config_json.is_null() || out_json.is_null() {
            return fail(KsStatus::NullPointer, "config_json or out_json is null");
        }
        let Ok(text) = CStr::from_ptr(config_json).to_str() else {
            return fail(KsStatus::Config, "config is not valid UTF-8");
        };
        let cfg = match RunConfig::parse(text) {
            Ok(c) => c,
            Err(e) => return fail(KsStatus::Config, e.to_string()),
        };
        let (doc, _, _) = match solve_config(&cfg, None) {
            Ok(r) => r,
            Err(e @ (Error::Domain(_) | Error::LengthMismatch { .. })) => return fail(KsStatus::Config, e.to_string()),
            Err(e) => return from_error(e),
        };
        let json = match serde_json::to_string(&doc).map(CString::new) {
            Ok(Ok(s)) => s,
            _ => return fail(KsStatus::Panic, "solution document is not serializable"),
        };
        *out_json = json.into_raw();
        if doc.converged {
            KsStatus::Ok
        } else {
            fail(KsStatus::NotConverged, format!("not converged after {} iterations", doc.iterations))
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
