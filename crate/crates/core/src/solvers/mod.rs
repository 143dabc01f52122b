//! Iterative drivers: each outer iteration is one operator-splitting step
//! built around [`CadeKernel`], stopped when `||u^{n+1} - u^n||_inf < tol`.

mod nonlinear;
mod two_phase;

pub use nonlinear::{fixed_point_p, solve_nonlinear, update_p_exponential};
pub use two_phase::{shrink_v, solve_two_phase};

use crate::ade::{check_positive, CadeKernel, OperatorCoeffs, SweepBounds, Sweeps};
use crate::catalog::{ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::{interp_boundary_lift, sup_diff, ScalarField, VectorField};
use crate::metrics::{error_l2, error_linf};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Time step of the splitting scheme.
    pub dt: f64,
    /// Penalty weight (nonlinear: `p ~ grad u`; two-phase: `u ~ v`).
    pub alpha: f64,
    /// Relative speed of the `u` flow; the kernel runs with `dt / gamma`.
    pub gamma: f64,
    pub tol: f64,
    /// Stopping threshold of the per-node fixed point for `p`.
    pub eps1: f64,
    pub max_outer: usize,
    pub max_fixed_point: usize,
    pub sweeps: Sweeps,
    /// Record `(l2, linf)` errors against the exact solution every iteration.
    pub record_errors: bool,
}

impl SolverConfig {
    pub const DEFAULT_ALPHA: f64 = 0.01;
    pub const DEFAULT_GAMMA: f64 = 1.0;
    pub const DEFAULT_EPS1: f64 = 1e-10;
    pub const DEFAULT_MAX_FIXED_POINT: usize = 200;
    pub const DEFAULT_MAX_OUTER: usize = 200_000;

    pub fn new(dt: f64) -> Self {
        SolverConfig {
            dt,
            alpha: Self::DEFAULT_ALPHA,
            gamma: Self::DEFAULT_GAMMA,
            tol: 1e-11,
            eps1: Self::DEFAULT_EPS1,
            max_outer: Self::DEFAULT_MAX_OUTER,
            max_fixed_point: Self::DEFAULT_MAX_FIXED_POINT,
            sweeps: Sweeps::Two,
            record_errors: false,
        }
    }

    /// Default tolerance per problem kind: `1e-11` for the linear and double
    /// obstacle, `1e-10` for the penalised formulations.
    pub fn default_tol(kind: ProblemKind) -> f64 {
        match kind {
            ProblemKind::Linear | ProblemKind::Double => 1e-11,
            ProblemKind::Nonlinear | ProblemKind::TwoPhase => 1e-10,
        }
    }

    /// Published settings per problem: `dt = 0.1 dx` for 1D linear-type
    /// problems, `dt = dx` in 2D, `dt = 10 dx` with `alpha = 0.01` for the
    /// nonlinear problem and `dt = 0.1 dx` with `alpha = 500` for the
    /// two-phase membrane; tolerance from [`SolverConfig::default_tol`].
    pub fn for_problem(problem: &ProblemSpec) -> Self {
        let (factor, alpha) = match problem.kind {
            ProblemKind::Nonlinear => (10.0, 0.01),
            ProblemKind::TwoPhase => (0.1, 500.0),
            ProblemKind::Linear | ProblemKind::Double if problem.grid.dim() == 2 => {
                (1.0, Self::DEFAULT_ALPHA)
            }
            ProblemKind::Linear | ProblemKind::Double => (0.1, Self::DEFAULT_ALPHA),
        };
        SolverConfig::new(factor * problem.grid.dx())
            .with_alpha(alpha)
            .with_tol(Self::default_tol(problem.kind))
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_max_outer(mut self, cap: usize) -> Self {
        self.max_outer = cap;
        self
    }

    pub fn with_sweeps(mut self, sweeps: Sweeps) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn recording_errors(mut self) -> Self {
        self.record_errors = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("dt", self.dt)?;
        check_positive("alpha", self.alpha)?;
        check_positive("gamma", self.gamma)?;
        check_positive("tol", self.tol)?;
        check_positive("eps1", self.eps1)?;
        for (name, cap) in [
            ("max_outer", self.max_outer),
            ("max_fixed_point", self.max_fixed_point),
        ] {
            if cap == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "iteration caps must be at least 1",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u_final: ScalarField,
    pub p_final: Option<VectorField>,
    pub v_final: Option<ScalarField>,
    pub iterations: usize,
    /// `||u^{n+1} - u^n||_inf` per iteration.
    pub diff_history: Vec<f64>,
    /// `(l2, linf)` error per iteration when requested and an exact solution exists.
    pub error_history: Vec<(f64, f64)>,
    pub converged: bool,
    /// Two-phase only: interface locations in 1D.
    pub free_boundary: Option<Vec<f64>>,
}

/// What an observer sees after every outer iteration.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'a> {
    pub iteration: usize,
    pub u: &'a [f64],
    pub diff: f64,
}

/// Feasible starting point: `max(psi, lift(g))`, then `min(phi, .)`.
pub fn initial_guess(problem: &ProblemSpec, bounds: &SweepBounds) -> ScalarField {
    let mut u0 = interp_boundary_lift(&problem.g);
    for (k, v) in u0.values_mut().iter_mut().enumerate() {
        *v = bounds.clamp(k, *v);
    }
    problem.g.impose(u0.values_mut());
    u0
}

fn require_kind(problem: &ProblemSpec, solver: &'static str, kinds: &[ProblemKind]) -> Result<()> {
    if kinds.contains(&problem.kind) {
        Ok(())
    } else {
        Err(Error::WrongKind {
            solver,
            found: problem.kind.as_str(),
        })
    }
}

/// Shared outer loop. `step` maps `u^n` to `u^{n+1}` (and may update any
/// auxiliary state it captures).
pub(crate) struct OuterLoop {
    pub u: ScalarField,
    pub iterations: usize,
    pub diff_history: Vec<f64>,
    pub error_history: Vec<(f64, f64)>,
    pub converged: bool,
}

pub(crate) fn run_outer(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    u0: ScalarField,
    mut step: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<OuterLoop> {
    let grid = *u0.grid();
    let mut u = u0;
    let mut next = ScalarField::zeros(grid);
    let mut diff_history = Vec::new();
    let mut error_history = Vec::new();
    let exact = if cfg.record_errors {
        problem.exact.as_ref()
    } else {
        None
    };
    let mut converged = false;
    for n in 1..=cfg.max_outer {
        step(u.values(), next.values_mut())?;
        let diff = sup_diff(next.values(), u.values());
        std::mem::swap(&mut u, &mut next);
        diff_history.push(diff);
        if let Some(ex) = exact {
            error_history.push((error_l2(&u, ex)?, error_linf(&u, ex)?));
        }
        observer(&Iterate {
            iteration: n,
            u: u.values(),
            diff,
        });
        if diff < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(OuterLoop {
        u,
        iterations: diff_history.len(),
        diff_history,
        error_history,
        converged,
    })
}

/// Linear obstacle problem: repeated constrained steps with `eta1 = 1`,
/// `eta2 = 0` and the lower obstacle only.
pub fn solve_linear(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_linear_observed(problem, cfg, &mut |_| {})
}

pub fn solve_linear_observed(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    require_kind(problem, "linear", &[ProblemKind::Linear])?;
    let bounds = SweepBounds {
        lower: problem.psi.clone(),
        upper: None,
    };
    constrained_loop(problem, cfg, bounds, observer)
}

/// Double obstacle problem: the linear loop with both bounds.
pub fn solve_double(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_double_observed(problem, cfg, &mut |_| {})
}

pub fn solve_double_observed(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    require_kind(problem, "double", &[ProblemKind::Double])?;
    constrained_loop(problem, cfg, problem.bounds(), observer)
}

fn constrained_loop(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    bounds: SweepBounds,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    cfg.validate()?;
    problem.validate()?;
    bounds.validate(&problem.grid)?;
    let mut kernel = CadeKernel::new(problem.grid, OperatorCoeffs::laplace(), cfg.dt, cfg.sweeps)?;
    let u0 = initial_guess(problem, &bounds);
    let f = problem.f.values();
    let out = run_outer(
        problem,
        cfg,
        u0,
        |u, next| {
            kernel.step_into(u, f, &bounds, &problem.g, next);
            Ok(())
        },
        observer,
    )?;
    Ok(SolveReport {
        u_final: out.u,
        p_final: None,
        v_final: None,
        iterations: out.iterations,
        diff_history: out.diff_history,
        error_history: out.error_history,
        converged: out.converged,
        free_boundary: None,
    })
}

/// Dispatches on the problem kind.
pub fn solve(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_observed(problem, cfg, &mut |_| {})
}

pub fn solve_observed(
    problem: &ProblemSpec,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    match problem.kind {
        ProblemKind::Linear => solve_linear_observed(problem, cfg, observer),
        ProblemKind::Nonlinear => nonlinear::solve_nonlinear_observed(problem, cfg, observer),
        ProblemKind::Double => solve_double_observed(problem, cfg, observer),
        ProblemKind::TwoPhase => two_phase::solve_two_phase_observed(problem, cfg, observer),
    }
}

pub use nonlinear::solve_nonlinear_observed;
pub use two_phase::solve_two_phase_observed;
