//! Projected Gauss-Seidel reference solver for the discrete obstacle
//! problem `psi <= u <= phi` with `A u = f` off the contact sets, where
//! `A u = -eta1 * lap_h(u) + eta2 * u` on interior nodes and Dirichlet
//! data on the boundary. It shares no code with the explicit kernel: each
//! node is solved exactly against its current neighbours and projected onto
//! the bounds. Slow, but monotone and easy to trust.

use rand::Rng;

use crate::ade::{OperatorCoeffs, SweepBounds};
use crate::catalog::{ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::grid::{interp_boundary_lift, BoundaryData, GridSpec, ScalarField};

/// A fully specified discrete obstacle problem.
#[derive(Debug, Clone)]
pub struct LcpInstance {
    pub coeffs: OperatorCoeffs,
    pub f: ScalarField,
    pub bounds: SweepBounds,
    pub g: BoundaryData,
    pub grid: GridSpec,
}

impl LcpInstance {
    pub fn new(
        coeffs: OperatorCoeffs,
        f: ScalarField,
        bounds: SweepBounds,
        g: BoundaryData,
    ) -> Result<Self> {
        let grid = *f.grid();
        if g.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        f.check_finite("source")?;
        g.check_finite()?;
        bounds.validate(&grid)?;
        Ok(LcpInstance {
            coeffs,
            f,
            bounds,
            g,
            grid,
        })
    }

    /// The same problem as a solver input. Only `eta1 = 1, eta2 = 0`
    /// instances map onto the obstacle solvers.
    pub fn to_problem(&self, name: &str) -> Result<ProblemSpec> {
        if self.coeffs != OperatorCoeffs::laplace() {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: self.coeffs.eta2,
                reason: "solvers need eta1 = 1 and eta2 = 0",
            });
        }
        let kind = if self.bounds.upper.is_some() {
            ProblemKind::Double
        } else {
            ProblemKind::Linear
        };
        Ok(ProblemSpec {
            name: name.to_string(),
            kind,
            grid: self.grid,
            psi: self.bounds.lower.clone(),
            phi: self.bounds.upper.clone(),
            f: self.f.clone(),
            g: self.g.clone(),
            forces: None,
            exact: None,
        })
    }

    /// `(A u)_k - f_k` at an interior node.
    fn operator_residual(&self, u: &[f64], k: usize) -> f64 {
        let h2 = self.grid.dx() * self.grid.dx();
        let mut lap = 0.0;
        for axis in 0..self.grid.dim() {
            let s = self.grid.stride(axis);
            lap += u[k - s] - 2.0 * u[k] + u[k + s];
        }
        -self.coeffs.eta1 * lap / h2 + self.coeffs.eta2 * u[k] - self.f.values()[k]
    }
}

/// Feasible starting point: boundary lift clamped into the bounds.
fn initial_guess(inst: &LcpInstance) -> Vec<f64> {
    let mut u = interp_boundary_lift(&inst.g).into_values();
    for (k, v) in u.iter_mut().enumerate() {
        *v = inst.bounds.clamp(k, *v);
    }
    inst.g.impose(&mut u);
    u
}

/// Projected Gauss-Seidel until the sup-norm of one sweep's update drops
/// below `tol`. Fails after `cap` sweeps.
pub fn oracle_solve(inst: &LcpInstance, tol: f64, cap: usize) -> Result<ScalarField> {
    let grid = inst.grid;
    let h2 = grid.dx() * grid.dx();
    let d = grid.dim();
    let off = inst.coeffs.eta1 / h2;
    let diag = 2.0 * d as f64 * off + inst.coeffs.eta2;
    let f = inst.f.values();
    let interior: Vec<usize> = (0..grid.len()).filter(|&k| !grid.is_boundary(k)).collect();
    let strides: Vec<usize> = (0..d).map(|a| grid.stride(a)).collect();

    let mut u = initial_guess(inst);
    let mut update = f64::INFINITY;
    for _ in 0..cap {
        update = 0.0_f64;
        for &k in &interior {
            let nb: f64 = strides.iter().map(|&s| u[k - s] + u[k + s]).sum();
            let next = inst.bounds.clamp(k, (f[k] + off * nb) / diag);
            update = update.max((next - u[k]).abs());
            u[k] = next;
        }
        if update < tol {
            return ScalarField::new(grid, u);
        }
    }
    let field = ScalarField::new(grid, u)?;
    Err(Error::OracleCap {
        sweeps: cap,
        update,
        residual: complementarity_residual(&field, inst),
    })
}

/// Sup over interior nodes of the natural complementarity residual
/// `|min(max(A u - f, u - phi), u - psi)|`. It vanishes exactly when `u`
/// solves the obstacle problem: `A u = f` between the bounds, `A u >= f` on
/// lower contact and `A u <= f` on upper contact. Without an upper bound it
/// reduces to `|min(A u - f, u - psi)|`.
pub fn complementarity_residual(u: &ScalarField, inst: &LcpInstance) -> f64 {
    let grid = inst.grid;
    let v = u.values();
    let lower = inst.bounds.lower.as_ref().map(|b| b.values());
    let upper = inst.bounds.upper.as_ref().map(|b| b.values());
    let mut worst = 0.0_f64;
    for k in 0..grid.len() {
        if grid.is_boundary(k) {
            continue;
        }
        let mut r = inst.operator_residual(v, k);
        if let Some(hi) = upper {
            if hi[k].is_finite() {
                r = r.max(v[k] - hi[k]);
            }
        }
        if let Some(lo) = lower {
            if lo[k].is_finite() {
                r = r.min(v[k] - lo[k]);
            }
        }
        worst = worst.max(r.abs());
    }
    worst
}

/// Shape of randomly generated instances.
#[derive(Debug, Clone, Copy)]
pub struct RandomInstanceOptions {
    pub dim: usize,
    pub cells: usize,
    pub upper: bool,
    /// `eta1 = 1, eta2 = 0` instead of random coefficients.
    pub unit_coeffs: bool,
}

/// Random smooth function on `[0,1]^dim`: a few low cosine modes.
fn smooth_random(rng: &mut impl Rng, dim: usize, amplitude: f64) -> impl Fn(&[f64]) -> f64 {
    let modes: Vec<(f64, f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-amplitude..amplitude),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    move |x: &[f64]| {
        modes
            .iter()
            .map(|&(a, kx, px, ky, py)| {
                let mut v = a * (std::f64::consts::PI * kx * x[0] + px).cos();
                if dim == 2 {
                    v *= (std::f64::consts::PI * ky * x[1] + py).cos();
                }
                v
            })
            .sum()
    }
}

/// Random well-posed instance on `[0,1]^dim`: uniform source, smooth lower
/// obstacle pushed below the boundary data, optional upper obstacle above
/// both, and affine Dirichlet data.
pub fn random_instance(rng: &mut impl Rng, opts: RandomInstanceOptions) -> LcpInstance {
    let grid = if opts.dim == 1 {
        GridSpec::line(0.0, 1.0, opts.cells)
    } else {
        GridSpec::square(0.0, 1.0, opts.cells)
    }
    .expect("random instance grid");
    let coeffs = if opts.unit_coeffs {
        OperatorCoeffs::laplace()
    } else {
        OperatorCoeffs::new(rng.gen_range(0.2..3.0), rng.gen_range(0.0..4.0)).unwrap()
    };
    let (c0, c1, c2) = (
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let g = BoundaryData::from_fn(grid, |x| c0 + c1 * x[0] + if x.len() > 1 { c2 * x[1] } else { 0.0 });
    let f_amp = rng.gen_range(0.0..20.0);
    let f = ScalarField::from_fn(grid, |_| rng.gen_range(-f_amp..f_amp));

    let bump = smooth_random(rng, opts.dim, 1.5);
    let lift = rng.gen_range(0.0..1.0);
    let mut psi = ScalarField::from_fn(grid, |x| bump(x) + lift);
    let excess = g
        .indices()
        .iter()
        .zip(g.values())
        .map(|(&k, &gv)| psi.values()[k] - gv)
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = excess.max(0.0) + 0.05;
    psi.values_mut().iter_mut().for_each(|v| *v -= shift);

    let upper = if opts.upper {
        let cap = smooth_random(rng, opts.dim, 1.0);
        let base = rng.gen_range(0.2..1.5);
        let mut phi = ScalarField::from_fn(grid, |x| cap(x) + base);
        for (p, &lo) in phi.values_mut().iter_mut().zip(psi.values()) {
            *p = p.max(lo + 0.02);
        }
        let deficit = g
            .indices()
            .iter()
            .zip(g.values())
            .map(|(&k, &gv)| gv - phi.values()[k])
            .fold(f64::NEG_INFINITY, f64::max);
        let lift_up = deficit.max(0.0) + 0.05;
        phi.values_mut().iter_mut().for_each(|v| *v += lift_up);
        Some(phi)
    } else {
        None
    };
    let bounds = SweepBounds {
        lower: Some(psi),
        upper,
    };
    LcpInstance::new(coeffs, f, bounds, g).expect("random instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unconstrained_linear_data_gives_line() {
        let grid = GridSpec::line(0.0, 1.0, 16).unwrap();
        let psi = ScalarField::constant(grid, f64::NEG_INFINITY);
        let inst = LcpInstance::new(
            OperatorCoeffs::laplace(),
            ScalarField::zeros(grid),
            SweepBounds::lower(psi),
            BoundaryData::endpoints(grid, 0.0, 1.0),
        )
        .unwrap();
        let tol = 1e-13;
        let u = oracle_solve(&inst, tol, 100_000).unwrap();
        for k in 0..=16 {
            assert!((u.values()[k] - grid.coord(0, k)).abs() < 1e-12);
        }
        assert!(complementarity_residual(&u, &inst) < 1e-9);
    }

    #[test]
    fn random_instances_are_complementary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for upper in [false, true] {
            for _ in 0..10 {
                let inst = random_instance(
                    &mut rng,
                    RandomInstanceOptions {
                        dim: 1,
                        cells: 16,
                        upper,
                        unit_coeffs: false,
                    },
                );
                let tol = 1e-13;
                let u = oracle_solve(&inst, tol, 1_000_000).unwrap();
                assert!(inst.bounds.contains(u.values()));
                let h2 = inst.grid.dx() * inst.grid.dx();
                assert!(complementarity_residual(&u, &inst) <= 10.0 * tol / h2);
                let psi = inst.bounds.lower.as_ref().unwrap().values();
                for k in 1..16 {
                    let r = inst.operator_residual(u.values(), k).abs();
                    let on_lower = (u.values()[k] - psi[k]).abs() < 1e-10;
                    let on_upper = inst
                        .bounds
                        .upper
                        .as_ref()
                        .is_some_and(|phi| (phi.values()[k] - u.values()[k]).abs() < 1e-10);
                    assert!(r < 1e-8 || on_lower || on_upper, "node {k}: residual {r}");
                }
            }
        }
    }

    #[test]
    fn residual_vanishes_on_supersolution_obstacle() {
        // psi concave with -lap(psi) = 2 >= 0 = f: u = psi is a solution
        let grid = GridSpec::line(0.0, 1.0, 10).unwrap();
        let psi = ScalarField::from_fn(grid, |x| x[0] * (1.0 - x[0]));
        let inst = LcpInstance::new(
            OperatorCoeffs::laplace(),
            ScalarField::zeros(grid),
            SweepBounds::lower(psi.clone()),
            BoundaryData::constant(grid, 0.0),
        )
        .unwrap();
        assert!(complementarity_residual(&psi, &inst) < 1e-12);
    }

    #[test]
    fn residual_of_affine_lift_is_zero() {
        let grid = GridSpec::square(0.0, 1.0, 8).unwrap();
        let g = BoundaryData::from_fn(grid, |x| 1.0 + 2.0 * x[0] - x[1]);
        let inst = LcpInstance::new(
            OperatorCoeffs::laplace(),
            ScalarField::zeros(grid),
            SweepBounds::none(),
            g.clone(),
        )
        .unwrap();
        assert!(complementarity_residual(&interp_boundary_lift(&g), &inst) < 1e-10);
    }

    #[test]
    fn symmetric_instance_gives_symmetric_solution() {
        let grid = GridSpec::line(0.0, 1.0, 20).unwrap();
        let psi = ScalarField::from_fn(grid, |x| 1.0 - 30.0 * (x[0] - 0.5).powi(2));
        let inst = LcpInstance::new(
            OperatorCoeffs::laplace(),
            ScalarField::constant(grid, -3.0),
            SweepBounds::lower(psi),
            BoundaryData::constant(grid, 0.0),
        )
        .unwrap();
        let u = oracle_solve(&inst, 1e-15, 1_000_000).unwrap();
        let v = u.values();
        for k in 0..=20 {
            assert!((v[k] - v[20 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = random_instance(
            &mut rng,
            RandomInstanceOptions {
                dim: 2,
                cells: 8,
                upper: false,
                unit_coeffs: true,
            },
        );
        assert!(matches!(
            oracle_solve(&inst, 1e-15, 2),
            Err(Error::OracleCap { sweeps: 2, .. })
        ));
    }
}
