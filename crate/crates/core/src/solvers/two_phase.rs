//! Two-phase membrane problem, `min 1/2|grad u|^2 + mu1 u_+ - mu2 u_-`,
//! split with an auxiliary `v ~ u` carrying the absolute value.

use super::{initial_guess, require_kind, run_outer, Iterate, SolveReport, SolverConfig};
use crate::ade::{check_positive, CadeKernel, OperatorCoeffs, SweepBounds};
use crate::catalog::{free_boundary_1d, ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Pointwise minimiser of
/// `1/2 (v - v_n)^2 + lambda2 dt |v| + alpha dt / 2 (v - u_n)^2`:
/// soft thresholding of `w = (v_n + alpha dt u_n) / (1 + alpha dt)` at
/// `lambda2 dt / (1 + alpha dt)`.
pub fn shrink_v(
    v_n: &ScalarField,
    u_n: &ScalarField,
    lambda2: f64,
    alpha: f64,
    dt: f64,
) -> Result<ScalarField> {
    v_n.same_grid(u_n)?;
    check_positive("alpha", alpha)?;
    check_positive("dt", dt)?;
    if !(lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda2",
            value: lambda2,
            reason: "must be nonnegative",
        });
    }
    let mut out = v_n.clone();
    shrink_into(v_n.values(), u_n.values(), lambda2, alpha, dt, out.values_mut());
    Ok(out)
}

fn shrink_into(v_n: &[f64], u_n: &[f64], lambda2: f64, alpha: f64, dt: f64, out: &mut [f64]) {
    let denom = 1.0 + alpha * dt;
    let threshold = lambda2 * dt / denom;
    for ((o, &v), &u) in out.iter_mut().zip(v_n).zip(u_n) {
        let w = (v + alpha * dt * u) / denom;
        *o = w.signum() * (w.abs() - threshold).max(0.0);
    }
}

pub fn solve_two_phase(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_two_phase_observed(problem, cfg, &mut |_| {})
}

pub fn solve_two_phase_observed(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    require_kind(problem, "two-phase", &[ProblemKind::TwoPhase])?;
    cfg.validate()?;
    problem.validate()?;
    let (mu1, mu2) = problem.forces.expect("validated two-phase forces");
    let lambda1 = 0.5 * (mu1 - mu2);
    let lambda2 = 0.5 * (mu1 + mu2);
    let grid = problem.grid;
    let bounds = SweepBounds::none();
    let coeffs = OperatorCoeffs::new(1.0, cfg.alpha)?;
    let mut kernel = CadeKernel::new(grid, coeffs, cfg.dt / cfg.gamma, cfg.sweeps)?;
    let u0 = initial_guess(problem, &bounds);
    let mut v = u0.clone().into_values();
    let mut source = vec![0.0; grid.len()];
    let f = problem.f.values();

    let out = run_outer(
        problem,
        cfg,
        u0,
        |u, next| {
            let v_prev = v.clone();
            shrink_into(&v_prev, u, lambda2, cfg.alpha, cfg.dt, &mut v);
            for ((s, &fk), &vk) in source.iter_mut().zip(f).zip(&v) {
                *s = fk - lambda1 + cfg.alpha * vk;
            }
            kernel.step_into(u, &source, &bounds, &problem.g, next);
            Ok(())
        },
        observer,
    )?;
    let v_final = ScalarField::new(grid, v)?;
    let free_boundary = (grid.dim() == 1).then(|| interface_points(&v_final));
    Ok(SolveReport {
        u_final: out.u,
        p_final: None,
        v_final: Some(v_final),
        iterations: out.iterations,
        diff_history: out.diff_history,
        error_history: out.error_history,
        converged: out.converged,
        free_boundary,
    })
}

/// Interfaces of the phases seen through `v`, which is exactly zero on the
/// null phase.
fn interface_points(v: &ScalarField) -> Vec<f64> {
    free_boundary_1d(v, 0.0)
}
