//! Alternating direction explicit sweeps with optional pointwise bounds.
//!
//! One step solves the discrete heat-type equation
//! `u_t - eta1 * lap(u) + eta2 * u = f` by running Gauss-Seidel-like passes
//! in opposite node orders and averaging them. Each nodal value is clamped
//! into `[lower, upper]` as soon as it is computed, which makes the solution
//! of the discrete complementarity problem a fixed point of the step.

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCoeffs {
    pub eta1: f64,
    pub eta2: f64,
}

impl OperatorCoeffs {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        if !(eta1 > 0.0 && eta1.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta1",
                value: eta1,
                reason: "diffusion coefficient must be positive",
            });
        }
        if !(eta2 >= 0.0 && eta2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta2",
                value: eta2,
                reason: "reaction coefficient must be nonnegative",
            });
        }
        Ok(OperatorCoeffs { eta1, eta2 })
    }

    /// Pure diffusion with unit coefficient.
    pub fn laplace() -> Self {
        OperatorCoeffs {
            eta1: 1.0,
            eta2: 0.0,
        }
    }
}

/// Lower (`psi`) and upper (`phi`) obstacles. A missing side or a ±inf entry
/// means the node is unconstrained on that side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepBounds {
    pub lower: Option<ScalarField>,
    pub upper: Option<ScalarField>,
}

impl SweepBounds {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn lower(psi: ScalarField) -> Self {
        SweepBounds {
            lower: Some(psi),
            upper: None,
        }
    }

    pub fn both(psi: ScalarField, phi: ScalarField) -> Self {
        SweepBounds {
            lower: Some(psi),
            upper: Some(phi),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_none() && self.upper.is_none()
    }

    /// Checks grids, NaNs and `lower <= upper`.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        for (b, what) in [(&self.lower, "lower bound"), (&self.upper, "upper bound")] {
            if let Some(b) = b {
                if b.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                b.check_not_nan(what)?;
            }
        }
        if let (Some(lo), Some(hi)) = (&self.lower, &self.upper) {
            for (index, (&l, &u)) in lo.values().iter().zip(hi.values()).enumerate() {
                if l > u {
                    return Err(Error::InconsistentBounds {
                        index,
                        lower: l,
                        upper: u,
                    });
                }
            }
        }
        Ok(())
    }

    /// `min(upper, max(lower, v))` at node `k`.
    #[inline]
    pub fn clamp(&self, k: usize, v: f64) -> f64 {
        clamp_node(
            self.lower.as_ref().map(|f| f.values()),
            self.upper.as_ref().map(|f| f.values()),
            k,
            v,
        )
    }

    /// True iff `values` lies inside the bounds at every node.
    pub fn contains(&self, values: &[f64]) -> bool {
        values.iter().enumerate().all(|(k, &v)| {
            self.lower.as_ref().map_or(true, |lo| v >= lo.values()[k])
                && self.upper.as_ref().map_or(true, |hi| v <= hi.values()[k])
        })
    }
}

#[inline]
fn clamp_node(lower: Option<&[f64]>, upper: Option<&[f64]>, k: usize, v: f64) -> f64 {
    let v = match lower {
        Some(lo) => v.max(lo[k]),
        None => v,
    };
    match upper {
        Some(hi) => v.min(hi[k]),
        None => v,
    }
}

/// Number of directional passes averaged per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sweeps {
    /// Forward and backward lexicographic order.
    #[default]
    Two,
    /// Adds the two anti-diagonal orders in 2D. Same as `Two` in 1D.
    Four,
}

impl Sweeps {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            2 => Some(Sweeps::Two),
            4 => Some(Sweeps::Four),
            _ => None,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Sweeps::Two => 2,
            Sweeps::Four => 4,
        }
    }
}

/// `(1 + c * dt * eta1 / dx^2 + dt * eta2 / 2)^-1` with `c = 1` in 1D and
/// `c = 2` in 2D.
pub fn zeta(coeffs: OperatorCoeffs, dt: f64, dx: f64, dim: usize) -> Result<f64> {
    check_positive("dt", dt)?;
    check_positive("dx", dx)?;
    Ok(1.0 / (1.0 + dim as f64 * dt * coeffs.eta1 / (dx * dx) + 0.5 * dt * coeffs.eta2))
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

/// Reusable explicit step for a fixed grid, operator and time step.
///
/// Holds the sweep buffers so repeated steps inside a solver do not
/// allocate. Inputs are assumed validated; use [`cade_step`] for a checked
/// one-off step.
#[derive(Debug, Clone)]
pub struct CadeKernel {
    grid: GridSpec,
    sweeps: Sweeps,
    zeta: f64,
    ratio: f64,
    dt: f64,
    half_reaction: f64,
    passes: Vec<Vec<f64>>,
}

impl CadeKernel {
    pub fn new(grid: GridSpec, coeffs: OperatorCoeffs, dt: f64, sweeps: Sweeps) -> Result<Self> {
        let dx = grid.dx();
        let zeta = zeta(coeffs, dt, dx, grid.dim())?;
        let n_passes = match (grid.dim(), sweeps) {
            (2, Sweeps::Four) => 4,
            _ => 2,
        };
        Ok(CadeKernel {
            grid,
            sweeps,
            zeta,
            ratio: dt * coeffs.eta1 / (dx * dx),
            dt,
            half_reaction: 0.5 * dt * coeffs.eta2,
            passes: vec![vec![0.0; grid.len()]; n_passes],
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn sweeps(&self) -> Sweeps {
        self.sweeps
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// One constrained step from `u_n` into `out`. Boundary nodes of `out`
    /// receive `g` exactly.
    pub fn step_into(
        &mut self,
        u_n: &[f64],
        f: &[f64],
        bounds: &SweepBounds,
        g: &BoundaryData,
        out: &mut [f64],
    ) {
        let lower = bounds.lower.as_ref().map(|b| b.values());
        let upper = bounds.upper.as_ref().map(|b| b.values());
        let params = PassParams {
            zeta: self.zeta,
            ratio: self.ratio,
            dt: self.dt,
            half_reaction: self.half_reaction,
            lower,
            upper,
        };
        let grid = self.grid;
        for (p, buf) in self.passes.iter_mut().enumerate() {
            buf.copy_from_slice(u_n);
            g.impose(buf);
            let order = match p {
                0 => [Dir::Up, Dir::Up],
                1 => [Dir::Down, Dir::Down],
                2 => [Dir::Up, Dir::Down],
                _ => [Dir::Down, Dir::Up],
            };
            if grid.dim() == 1 {
                pass_1d(&grid, &params, order[0], u_n, f, buf);
            } else {
                pass_2d(&grid, &params, order, u_n, f, buf);
            }
        }
        match self.passes.as_slice() {
            [a, b] => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = 0.5 * (a[k] + b[k]);
                }
            }
            [a, b, c, d] => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = 0.25 * ((a[k] + b[k]) + (c[k] + d[k]));
                }
            }
            _ => unreachable!("kernel holds two or four passes"),
        }
        g.impose(out);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    Up,
    Down,
}

struct PassParams<'a> {
    zeta: f64,
    ratio: f64,
    dt: f64,
    half_reaction: f64,
    lower: Option<&'a [f64]>,
    upper: Option<&'a [f64]>,
}

impl PassParams<'_> {
    /// Nodal update; `neighbours` already mixes new (upstream) and old
    /// (downstream) values because the pass buffer starts as a copy of `u_n`.
    #[inline]
    fn update(&self, k: usize, center_old: f64, f: f64, neighbours: f64, dim: f64) -> f64 {
        let raw = self.zeta
            * (center_old + self.dt * f + self.ratio * (neighbours - dim * center_old)
                - self.half_reaction * center_old);
        clamp_node(self.lower, self.upper, k, raw)
    }
}

fn pass_1d(grid: &GridSpec, p: &PassParams<'_>, dir: Dir, u_n: &[f64], f: &[f64], buf: &mut [f64]) {
    let m = grid.cells(0);
    let mut step = |i: usize| {
        let nb = buf[i - 1] + buf[i + 1];
        buf[i] = p.update(i, u_n[i], f[i], nb, 1.0);
    };
    match dir {
        Dir::Up => (1..m).for_each(&mut step),
        Dir::Down => (1..m).rev().for_each(&mut step),
    }
}

fn pass_2d(
    grid: &GridSpec,
    p: &PassParams<'_>,
    order: [Dir; 2],
    u_n: &[f64],
    f: &[f64],
    buf: &mut [f64],
) {
    let (m0, m1) = (grid.cells(0), grid.cells(1));
    let s = grid.stride(0);
    let rows: Box<dyn Iterator<Item = usize>> = match order[0] {
        Dir::Up => Box::new(1..m0),
        Dir::Down => Box::new((1..m0).rev()),
    };
    for i in rows {
        let base = i * s;
        let mut step = |j: usize| {
            let k = base + j;
            let nb = buf[k - s] + buf[k + s] + buf[k - 1] + buf[k + 1];
            buf[k] = p.update(k, u_n[k], f[k], nb, 2.0);
        };
        match order[1] {
            Dir::Up => (1..m1).for_each(&mut step),
            Dir::Down => (1..m1).rev().for_each(&mut step),
        }
    }
}

/// Checked single step with two sweeps. See [`cade_step_with`].
pub fn cade_step(
    coeffs: OperatorCoeffs,
    u_n: &ScalarField,
    f: &ScalarField,
    bounds: &SweepBounds,
    g: &BoundaryData,
    dt: f64,
) -> Result<ScalarField> {
    cade_step_with(coeffs, u_n, f, bounds, g, dt, Sweeps::Two)
}

/// Checked single constrained step. With empty bounds this is plain ADE.
pub fn cade_step_with(
    coeffs: OperatorCoeffs,
    u_n: &ScalarField,
    f: &ScalarField,
    bounds: &SweepBounds,
    g: &BoundaryData,
    dt: f64,
    sweeps: Sweeps,
) -> Result<ScalarField> {
    let grid = *u_n.grid();
    u_n.same_grid(f)?;
    if g.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    u_n.check_finite("u_n")?;
    f.check_finite("source")?;
    g.check_finite()?;
    bounds.validate(&grid)?;
    let mut kernel = CadeKernel::new(grid, coeffs, dt, sweeps)?;
    let mut out = vec![0.0; grid.len()];
    kernel.step_into(u_n.values(), f.values(), bounds, g, &mut out);
    ScalarField::new(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::interp_boundary_lift;

    #[test]
    fn zeta_examples() {
        let c = OperatorCoeffs::laplace();
        let dx: f64 = 0.1;
        assert!((zeta(c, dx * dx, dx, 1).unwrap() - 0.5).abs() < 1e-15);
        let c = OperatorCoeffs::new(0.01, 0.0).unwrap();
        assert!((zeta(c, 1e-18, 0.1, 1).unwrap() - 1.0).abs() < 1e-15);
        let c = OperatorCoeffs::new(1.0, 2.0).unwrap();
        assert!((zeta(c, 1.0, 1.0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((zeta(c, 1.0, 1.0, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!(zeta(c, 0.0, 1.0, 1).is_err());
        assert!(zeta(c, 1.0, -1.0, 1).is_err());
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(OperatorCoeffs::new(0.0, 0.0).is_err());
        assert!(OperatorCoeffs::new(1.0, -1.0).is_err());
    }

    #[test]
    fn clamp_dominates() {
        let grid = GridSpec::line(0.0, 1.0, 2).unwrap();
        let u = ScalarField::zeros(grid);
        let psi = ScalarField::new(grid, vec![f64::NEG_INFINITY, 0.5, f64::NEG_INFINITY]).unwrap();
        let g = BoundaryData::constant(grid, 0.0);
        let out = cade_step(
            OperatorCoeffs::laplace(),
            &u,
            &ScalarField::zeros(grid),
            &SweepBounds::lower(psi),
            &g,
            0.1,
        )
        .unwrap();
        assert_eq!(out.values(), &[0.0, 0.5, 0.0]);
    }

    #[test]
    fn hand_evaluated_unconstrained_step() {
        // dt*eta1/dx^2 = 1, zeta = 1/2: each pass gives 0.5 * (1 + (0 - 1 + 0)) = 0
        let grid = GridSpec::line(0.0, 1.0, 2).unwrap();
        let dx = grid.dx();
        let u = ScalarField::new(grid, vec![0.0, 1.0, 0.0]).unwrap();
        let out = cade_step(
            OperatorCoeffs::laplace(),
            &u,
            &ScalarField::zeros(grid),
            &SweepBounds::none(),
            &BoundaryData::constant(grid, 0.0),
            dx * dx,
        )
        .unwrap();
        assert_eq!(out.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn constants_are_stationary() {
        for grid in [
            GridSpec::line(0.0, 1.0, 9).unwrap(),
            GridSpec::square(0.0, 1.0, 7).unwrap(),
        ] {
            for sweeps in [Sweeps::Two, Sweeps::Four] {
                let c = 0.3;
                let u = ScalarField::constant(grid, c);
                let psi = ScalarField::constant(grid, 0.1);
                let out = cade_step_with(
                    OperatorCoeffs::new(2.0, 0.0).unwrap(),
                    &u,
                    &ScalarField::zeros(grid),
                    &SweepBounds::lower(psi),
                    &BoundaryData::constant(grid, c),
                    0.37,
                    sweeps,
                )
                .unwrap();
                for v in out.values() {
                    assert!((v - c).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn rejects_nan_and_crossed_bounds() {
        let grid = GridSpec::line(0.0, 1.0, 4).unwrap();
        let g = BoundaryData::constant(grid, 0.0);
        let f = ScalarField::zeros(grid);
        let mut u = ScalarField::zeros(grid);
        u.values_mut()[2] = f64::NAN;
        let err = cade_step(OperatorCoeffs::laplace(), &u, &f, &SweepBounds::none(), &g, 0.1);
        assert!(matches!(err, Err(Error::NonFinite { index: 2, .. })));

        let u = ScalarField::zeros(grid);
        let bounds = SweepBounds::both(ScalarField::constant(grid, 1.0), ScalarField::zeros(grid));
        let err = cade_step(OperatorCoeffs::laplace(), &u, &f, &bounds, &g, 0.1);
        assert!(matches!(err, Err(Error::InconsistentBounds { .. })));

        let mut psi = ScalarField::zeros(grid);
        psi.values_mut()[1] = f64::NAN;
        let err = cade_step(OperatorCoeffs::laplace(), &u, &f, &SweepBounds::lower(psi), &g, 0.1);
        assert!(err.is_err());
    }

    #[test]
    fn boundary_is_imposed_bitwise() {
        let grid = GridSpec::square(0.0, 1.0, 6).unwrap();
        let g = BoundaryData::from_fn(grid, |x| (3.0 * x[0]).sin() + x[1] / 3.0);
        let u = interp_boundary_lift(&g);
        let out = cade_step(
            OperatorCoeffs::laplace(),
            &u,
            &ScalarField::constant(grid, 1.0),
            &SweepBounds::none(),
            &g,
            0.05,
        )
        .unwrap();
        assert!(g.matches(out.values()));
    }
}
