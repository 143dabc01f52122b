//! C ABI over `cade-core`.
//!
//! Problems and reports are opaque handles created and released by this
//! library. Every fallible call returns a [`CadeStatus`]; on failure a
//! description is available from [`cade_last_error`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cade_core::ade::{zeta, OperatorCoeffs, Sweeps};
use cade_core::catalog::{preset, ProblemKind, ProblemSpec};
use cade_core::grid::{BoundaryData, GridSpec, ScalarField};
use cade_core::metrics::{error_l2, error_linf};
use cade_core::solvers::{solve, SolveReport, SolverConfig};
use cade_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CadeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownPreset = 3,
    NoExactSolution = 4,
    BufferTooSmall = 5,
    SolveFailed = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CadeKind {
    Linear = 0,
    Nonlinear = 1,
    Double = 2,
    TwoPhase = 3,
}

/// Solver settings; fill with [`cade_options_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CadeOptions {
    pub dt: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub tol: f64,
    pub eps1: f64,
    pub max_outer: usize,
    pub max_fixed_point: usize,
    /// 2 or 4.
    pub sweeps: u32,
}

/// Opaque problem handle.
pub struct CadeProblem {
    inner: ProblemSpec,
}

/// Opaque result handle.
pub struct CadeReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (CadeStatus, String);

fn status_of(e: &Error) -> CadeStatus {
    match e {
        Error::UnknownPreset(_) => CadeStatus::UnknownPreset,
        Error::NoExactSolution(_) => CadeStatus::NoExactSolution,
        Error::FixedPointCap { .. } | Error::OracleCap { .. } => CadeStatus::SolveFailed,
        _ => CadeStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> Failure {
    (CadeStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CadeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CadeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CadeStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err((
            CadeStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cade_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cade_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a named benchmark problem with `cells` cells per axis.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cade_problem_preset(
    name: *const c_char,
    cells: usize,
    out: *mut *mut CadeProblem,
) -> CadeStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| (CadeStatus::InvalidArgument, "name is not UTF-8".to_string()))?;
        let inner = preset(name, cells).map_err(fail)?;
        *out = Box::into_raw(Box::new(CadeProblem { inner }));
        Ok(())
    })
}

/// Creates a problem on `[extent[0], extent[1]]` (times `[extent[2],
/// extent[3]]` in 2D) with `cells` cells per axis. Arrays hold one value per
/// node in row-major order (first index slowest). `psi`, `phi`, `f` and `g`
/// may be NULL (no lower bound, no upper bound, zero source, zero boundary
/// data); only the boundary entries of `g` are read. `mu1`, `mu2` are used
/// by the two-phase kind only.
///
/// # Safety
/// `extent` must hold `2 * dim` values and every non-NULL array must hold
/// as many values as the grid has nodes.
#[no_mangle]
pub unsafe extern "C" fn cade_problem_new(
    kind: CadeKind,
    dim: u32,
    extent: *const f64,
    cells: usize,
    psi: *const f64,
    phi: *const f64,
    f: *const f64,
    g: *const f64,
    mu1: f64,
    mu2: f64,
    out: *mut *mut CadeProblem,
) -> CadeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(1..=2).contains(&dim) {
            return Err((CadeStatus::InvalidArgument, format!("dim must be 1 or 2, got {dim}")));
        }
        let d = dim as usize;
        let ext = slice(extent, 2 * d, "extent")?;
        let pairs: Vec<(f64, f64)> = ext.chunks(2).map(|c| (c[0], c[1])).collect();
        let grid = GridSpec::new(&pairs, &vec![cells; d]).map_err(fail)?;
        let field = |p: *const f64, what: &str| -> Result<Option<ScalarField>, Failure> {
            if p.is_null() {
                return Ok(None);
            }
            let v = slice(p, grid.len(), what)?.to_vec();
            ScalarField::new(grid, v).map(Some).map_err(fail)
        };
        let kind = match kind {
            CadeKind::Linear => ProblemKind::Linear,
            CadeKind::Nonlinear => ProblemKind::Nonlinear,
            CadeKind::Double => ProblemKind::Double,
            CadeKind::TwoPhase => ProblemKind::TwoPhase,
        };
        let inner = ProblemSpec {
            name: "custom".into(),
            kind,
            grid,
            psi: field(psi, "psi")?,
            phi: field(phi, "phi")?,
            f: field(f, "f")?.unwrap_or_else(|| ScalarField::zeros(grid)),
            g: field(g, "g")?
                .map(|u| BoundaryData::from_field(&u))
                .unwrap_or_else(|| BoundaryData::constant(grid, 0.0)),
            forces: (kind == ProblemKind::TwoPhase).then_some((mu1, mu2)),
            exact: None,
        };
        inner.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(CadeProblem { inner }));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from a `cade_problem_*` constructor and not be used
/// afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cade_problem_free(problem: *mut CadeProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of grid nodes, or 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cade_problem_node_count(problem: *const CadeProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.grid.len())
}

/// Grid spacing, or NaN for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cade_problem_dx(problem: *const CadeProblem) -> f64 {
    problem.as_ref().map_or(f64::NAN, |p| p.inner.grid.dx())
}

/// Published defaults for this problem (time step rule, penalty, tolerance).
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cade_options_default(
    problem: *const CadeProblem,
    out: *mut CadeOptions,
) -> CadeStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = SolverConfig::for_problem(&p.inner);
        *out = CadeOptions {
            dt: c.dt,
            alpha: c.alpha,
            gamma: c.gamma,
            tol: c.tol,
            eps1: c.eps1,
            max_outer: c.max_outer,
            max_fixed_point: c.max_fixed_point,
            sweeps: c.sweeps.count(),
        };
        Ok(())
    })
}

/// Runs the solver matching the problem kind. Hitting `max_outer` is not
/// an error: check [`cade_report_converged`].
///
/// # Safety
/// `problem` must be a live handle, `options` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cade_solve(
    problem: *const CadeProblem,
    options: *const CadeOptions,
    out: *mut *mut CadeReport,
) -> CadeStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sweeps = Sweeps::from_count(o.sweeps).ok_or_else(|| {
            (CadeStatus::InvalidArgument, format!("sweeps must be 2 or 4, got {}", o.sweeps))
        })?;
        let mut cfg = SolverConfig::new(o.dt)
            .with_alpha(o.alpha)
            .with_gamma(o.gamma)
            .with_tol(o.tol)
            .with_max_outer(o.max_outer)
            .with_sweeps(sweeps);
        cfg.eps1 = o.eps1;
        cfg.max_fixed_point = o.max_fixed_point;
        let inner = solve(&p.inner, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(CadeReport { inner }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`cade_solve`] and not be used afterwards.
/// NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cade_report_free(report: *mut CadeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cade_report_iterations(report: *const CadeReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.iterations)
}

/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cade_report_converged(report: *const CadeReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.converged)
}

/// Copies the final solution (one value per node) into `buf`.
///
/// # Safety
/// `report` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn cade_report_solution(
    report: *const CadeReport,
    buf: *mut f64,
    len: usize,
) -> CadeStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        copy_out(r.inner.u_final.values(), buf, len)
    })
}

/// Copies `||u^{n+1} - u^n||_inf` per iteration; needs
/// [`cade_report_iterations`] slots.
///
/// # Safety
/// `report` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn cade_report_diff_history(
    report: *const CadeReport,
    buf: *mut f64,
    len: usize,
) -> CadeStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        copy_out(&r.inner.diff_history, buf, len)
    })
}

/// Two-phase 1D interfaces. Writes the number of points to `count`; copies
/// them when `buf` is non-NULL and large enough.
///
/// # Safety
/// `report` must be a live handle, `count` valid, `buf` NULL or writable
/// for `len` values.
#[no_mangle]
pub unsafe extern "C" fn cade_report_free_boundary(
    report: *const CadeReport,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> CadeStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        let points = r.inner.free_boundary.as_deref().unwrap_or(&[]);
        *count = points.len();
        if buf.is_null() {
            return Ok(());
        }
        copy_out(points, buf, len)
    })
}

/// L2 and sup errors of the report against the problem's exact solution.
///
/// # Safety
/// Handles must be live, `l2` and `linf` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cade_report_errors(
    report: *const CadeReport,
    problem: *const CadeProblem,
    l2: *mut f64,
    linf: *mut f64,
) -> CadeStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if l2.is_null() || linf.is_null() {
            return Err(null("output"));
        }
        let exact = p
            .inner
            .exact
            .as_ref()
            .ok_or_else(|| fail(Error::NoExactSolution(p.inner.name.clone())))?;
        *l2 = error_l2(&r.inner.u_final, exact).map_err(fail)?;
        *linf = error_linf(&r.inner.u_final, exact).map_err(fail)?;
        Ok(())
    })
}

/// Damping factor of the explicit sweep for `-eta1 lap + eta2` in `dim`
/// dimensions.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cade_zeta(
    eta1: f64,
    eta2: f64,
    dt: f64,
    dx: f64,
    dim: u32,
    out: *mut f64,
) -> CadeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(1..=2).contains(&dim) {
            return Err((CadeStatus::InvalidArgument, format!("dim must be 1 or 2, got {dim}")));
        }
        let coeffs = OperatorCoeffs::new(eta1, eta2).map_err(fail)?;
        *out = zeta(coeffs, dt, dx, dim as usize).map_err(fail)?;
        Ok(())
    })
}
