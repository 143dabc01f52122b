//! Operator-splitting solvers for obstacle-type free-boundary problems.
//!
//! The building block is [`ade::CadeKernel`], a fully explicit alternating
//! direction sweep that clamps every nodal update into the obstacle bounds.
//! On top of it sit the four iterative drivers in [`solvers`]: linear
//! obstacle, nonlinear (minimal-surface) obstacle, double obstacle and the
//! two-phase membrane problem. [`oracle`] is an independent projected
//! Gauss-Seidel solver for the same discrete complementarity systems,
//! [`catalog`] holds the benchmark problems and [`metrics`] the error norms
//! and convergence-order fits.

pub mod ade;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod solvers;

pub use ade::{cade_step, cade_step_with, zeta, CadeKernel, OperatorCoeffs, SweepBounds, Sweeps};
pub use catalog::{exact_solution, free_boundary_1d, preset, solve_rstar, ProblemKind, ProblemSpec};
pub use error::{Error, Result};
pub use grid::{
    divergence_h, gradient_h, interp_boundary_lift, laplacian_h, BoundaryData, GridSpec,
    ScalarField, VectorField,
};
pub use metrics::{error_l2, error_linf, fit_order, ConvergenceStudy};
pub use oracle::{complementarity_residual, oracle_solve, LcpInstance};
pub use solvers::{
    fixed_point_p, shrink_v, solve, solve_double, solve_linear, solve_nonlinear,
    solve_two_phase, update_p_exponential, SolveReport, SolverConfig,
};
