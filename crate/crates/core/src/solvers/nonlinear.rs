//! Minimal-surface obstacle problem via the `p ~ grad u` relaxation.
//!
//! Per outer iteration: an implicit step for `p` (solved pointwise by a
//! fixed point), a constrained explicit step for `u` with source
//! `f - alpha * div p`, and the exact exponential relaxation of `p` towards
//! `grad u`.

use super::{initial_guess, require_kind, run_outer, Iterate, SolveReport, SolverConfig};
use crate::ade::{check_positive, CadeKernel, OperatorCoeffs};
use crate::catalog::{ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::{divergence_h, gradient_h, ScalarField, VectorField};

/// Solves `q (1 + dt / sqrt(1 + |q|^2)) = p^n` node by node with the
/// iteration `q <- p^n / (1 + dt / sqrt(1 + |q|^2))` starting from `p^n`.
pub fn fixed_point_p(p_n: &VectorField, dt: f64, eps1: f64, cap: usize) -> Result<VectorField> {
    check_positive("dt", dt)?;
    check_positive("eps1", eps1)?;
    let d = p_n.grid().dim();
    let mut out = p_n.clone();
    let mut q = [0.0; 2];
    let mut next = [0.0; 2];
    let mut worst: Option<f64> = None;
    for (target, slot) in p_n.values().chunks(d).zip(out.values_mut().chunks_mut(d)) {
        q[..d].copy_from_slice(target);
        let mut converged = false;
        for _ in 0..cap {
            let norm2: f64 = q[..d].iter().map(|v| v * v).sum();
            let factor = 1.0 / (1.0 + dt / (1.0 + norm2).sqrt());
            let mut change = 0.0_f64;
            for c in 0..d {
                next[c] = factor * target[c];
                change = change.max((next[c] - q[c]).abs());
            }
            q[..d].copy_from_slice(&next[..d]);
            if change < eps1 {
                converged = true;
                break;
            }
        }
        if !converged {
            let norm2: f64 = q[..d].iter().map(|v| v * v).sum();
            let scale = 1.0 + dt / (1.0 + norm2).sqrt();
            let r = (0..d).fold(0.0_f64, |m, c| m.max((q[c] * scale - target[c]).abs()));
            worst = Some(worst.map_or(r, |w| w.max(r)));
        }
        slot.copy_from_slice(&q[..d]);
    }
    match worst {
        Some(residual) => Err(Error::FixedPointCap {
            iterations: cap,
            residual,
        }),
        None => Ok(out),
    }
}

/// `exp(-alpha dt) p_half + (1 - exp(-alpha dt)) grad u_next`.
pub fn update_p_exponential(
    p_half: &VectorField,
    u_next: &ScalarField,
    alpha: f64,
    dt: f64,
) -> Result<VectorField> {
    check_positive("alpha", alpha)?;
    check_positive("dt", dt)?;
    if p_half.grid() != u_next.grid() {
        return Err(Error::GridMismatch);
    }
    let keep = (-alpha * dt).exp();
    let mut out = gradient_h(u_next);
    for (o, &p) in out.values_mut().iter_mut().zip(p_half.values()) {
        *o = keep * p + (1.0 - keep) * *o;
    }
    Ok(out)
}

pub fn solve_nonlinear(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_nonlinear_observed(problem, cfg, &mut |_| {})
}

pub fn solve_nonlinear_observed(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    require_kind(problem, "nonlinear", &[ProblemKind::Nonlinear])?;
    cfg.validate()?;
    problem.validate()?;
    let grid = problem.grid;
    let bounds = problem.bounds();
    let coeffs = OperatorCoeffs::new(cfg.alpha, 0.0)?;
    let mut kernel = CadeKernel::new(grid, coeffs, cfg.dt / cfg.gamma, cfg.sweeps)?;
    let u0 = initial_guess(problem, &bounds);
    let mut p = gradient_h(&u0);
    let mut source = ScalarField::zeros(grid);
    let f = problem.f.values();

    let out = run_outer(
        problem,
        cfg,
        u0,
        |u, next| {
            let p_half = fixed_point_p(&p, cfg.dt, cfg.eps1, cfg.max_fixed_point)?;
            let div = divergence_h(&p_half);
            for ((s, &fk), &dk) in source.values_mut().iter_mut().zip(f).zip(div.values()) {
                *s = fk - cfg.alpha * dk;
            }
            kernel.step_into(u, source.values(), &bounds, &problem.g, next);
            let u_next = ScalarField::new(grid, next.to_vec())?;
            p = update_p_exponential(&p_half, &u_next, cfg.alpha, cfg.dt)?;
            Ok(())
        },
        observer,
    )?;
    Ok(SolveReport {
        u_final: out.u,
        p_final: Some(p),
        v_final: None,
        iterations: out.iterations,
        diff_history: out.diff_history,
        error_history: out.error_history,
        converged: out.converged,
        free_boundary: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn scalar_p(v: f64) -> VectorField {
        let grid = GridSpec::line(0.0, 1.0, 2).unwrap();
        VectorField::new(grid, vec![v; 3]).unwrap()
    }

    #[test]
    fn origin_is_fixed() {
        let q = fixed_point_p(&scalar_p(0.0), 0.7, 1e-12, 50).unwrap();
        assert!(q.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vanishing_step_is_identity() {
        let grid = GridSpec::square(0.0, 1.0, 3).unwrap();
        let p = VectorField::from_fn(grid, |x| [x[0] * 3.0 - 1.0, x[1] - 0.2]);
        let q = fixed_point_p(&p, 1e-12, 1e-14, 50).unwrap();
        for (a, b) in q.values().iter().zip(p.values()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn scalar_root_matches_bisection() {
        // oracle: bisection on x (1 + 1/sqrt(1+x^2)) - 2 over [0, 2]
        let h = |x: f64| x * (1.0 + 1.0 / (1.0 + x * x).sqrt()) - 2.0;
        let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let q = fixed_point_p(&scalar_p(2.0), 1.0, 1e-14, 500).unwrap();
        for v in q.values() {
            assert!((v - root).abs() < 1e-12, "{v} vs {root}");
        }
    }

    #[test]
    fn cap_reports_residual() {
        let err = fixed_point_p(&scalar_p(5.0), 1.0, 1e-15, 1).unwrap_err();
        assert!(matches!(err, Error::FixedPointCap { iterations: 1, residual } if residual > 0.0));
    }

    #[test]
    fn exponential_update_limits() {
        let grid = GridSpec::line(0.0, 1.0, 8).unwrap();
        let u = ScalarField::from_fn(grid, |x| x[0] * x[0]);
        let p = VectorField::from_fn(grid, |x| [1.0 - x[0], 0.0]);
        let grad = gradient_h(&u);

        let small = update_p_exponential(&p, &u, 1e-300, 1e-10).unwrap();
        assert_eq!(small.values(), p.values());

        let big = update_p_exponential(&p, &u, 50.0, 1.0).unwrap();
        for (a, b) in big.values().iter().zip(grad.values()) {
            assert!((a - b).abs() <= 1e-15);
        }

        let half = update_p_exponential(&p, &u, std::f64::consts::LN_2, 1.0).unwrap();
        for ((h, a), b) in half.values().iter().zip(p.values()).zip(grad.values()) {
            assert!((h - 0.5 * (a + b)).abs() < 1e-15);
        }
    }

    proptest::proptest! {
        #[test]
        fn fixed_point_shrinks_magnitude(px in -50.0f64..50.0, py in -50.0f64..50.0, dt in 1e-3f64..20.0) {
            let grid = GridSpec::square(0.0, 1.0, 2).unwrap();
            let p = VectorField::new(grid, [px, py].repeat(grid.len())).unwrap();
            let q = fixed_point_p(&p, dt, 1e-12, 500).unwrap();
            for (a, b) in q.values().iter().zip(p.values()) {
                proptest::prop_assert!(a.abs() <= b.abs());
                proptest::prop_assert!(a * b >= 0.0);
            }
            let n = q.node(0);
            let scale = 1.0 + dt / (1.0 + n[0] * n[0] + n[1] * n[1]).sqrt();
            proptest::prop_assert!((n[0] * scale - px).abs() < 1e-9 * (1.0 + px.abs()));
        }

        #[test]
        fn exponential_update_is_between(alpha in 1e-3f64..10.0, dt in 1e-3f64..10.0, seed in 0u64..1000) {
            let grid = GridSpec::line(0.0, 1.0, 6).unwrap();
            let u = ScalarField::from_fn(grid, |x| ((seed as f64) * x[0]).sin());
            let p = VectorField::from_fn(grid, |x| [((seed as f64) + x[0]).cos() * 3.0, 0.0]);
            let grad = gradient_h(&u);
            let out = update_p_exponential(&p, &u, alpha, dt).unwrap();
            for ((o, a), b) in out.values().iter().zip(p.values()).zip(grad.values()) {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                proptest::prop_assert!(*o >= lo - 1e-14 && *o <= hi + 1e-14);
            }
        }
    }
}
