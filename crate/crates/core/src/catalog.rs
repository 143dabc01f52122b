//! Benchmark obstacles, boundary data and closed-form solutions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::ade::SweepBounds;
use crate::error::{Error, Result};
use crate::grid::{BoundaryData, GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Linear,
    Nonlinear,
    Double,
    TwoPhase,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Linear => "linear",
            ProblemKind::Nonlinear => "nonlinear",
            ProblemKind::Double => "double",
            ProblemKind::TwoPhase => "two-phase",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(ProblemKind::Linear),
            "nonlinear" => Ok(ProblemKind::Nonlinear),
            "double" => Ok(ProblemKind::Double),
            "two-phase" | "twophase" => Ok(ProblemKind::TwoPhase),
            other => Err(format!("unknown problem kind `{other}`")),
        }
    }
}

/// A fully sampled problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ProblemKind,
    pub grid: GridSpec,
    /// Lower obstacle; `-inf` entries mean unconstrained.
    pub psi: Option<ScalarField>,
    /// Upper obstacle; `+inf` entries mean unconstrained.
    pub phi: Option<ScalarField>,
    pub f: ScalarField,
    pub g: BoundaryData,
    /// `(mu1, mu2)` for the two-phase membrane.
    pub forces: Option<(f64, f64)>,
    pub exact: Option<ScalarField>,
}

impl ProblemSpec {
    pub fn bounds(&self) -> SweepBounds {
        SweepBounds {
            lower: self.psi.clone(),
            upper: self.phi.clone(),
        }
    }

    pub fn with_kind(mut self, kind: ProblemKind) -> Self {
        self.kind = kind;
        self
    }

    /// Checks grids and finiteness of every sampled field.
    pub fn validate(&self) -> Result<()> {
        if self.g.grid() != &self.grid || self.f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        self.f.check_finite("source")?;
        self.g.check_finite()?;
        self.bounds().validate(&self.grid)?;
        if let Some(e) = &self.exact {
            if e.grid() != &self.grid {
                return Err(Error::GridMismatch);
            }
        }
        if self.kind == ProblemKind::TwoPhase {
            match self.forces {
                Some((m1, m2)) if m1 >= 0.0 && m2 >= 0.0 => {}
                Some((m1, _)) => {
                    return Err(Error::InvalidParameter {
                        name: "mu",
                        value: m1,
                        reason: "two-phase forces must be nonnegative",
                    })
                }
                None => {
                    return Err(Error::InvalidParameter {
                        name: "mu",
                        value: f64::NAN,
                        reason: "two-phase problem needs forces",
                    })
                }
            }
        }
        Ok(())
    }
}

/// Every preset name accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "psi1",
    "psi2",
    "psi3",
    "psi4",
    "psi5",
    "psi6",
    "psi6-radial",
    "double1d",
    "double2d",
    "twophase-sym",
    "twophase-asym",
    "free-line",
];

/// Presets that carry a closed-form solution.
pub const EXACT_NAMES: &[&str] = &["psi1", "psi5", "twophase-sym", "free-line"];

pub fn psi1(x: f64) -> f64 {
    let x = if x > 0.5 { 1.0 - x } else { x };
    if x <= 0.25 {
        100.0 * x * x
    } else {
        100.0 * x * (1.0 - x) - 12.5
    }
}

pub fn psi2(x: f64) -> f64 {
    let x = if x > 0.5 { 1.0 - x } else { x };
    if x <= 0.25 {
        10.0 * (2.0 * PI * x).sin()
    } else {
        5.0 * (PI * (4.0 * x - 1.0)).cos() + 5.0
    }
}

pub fn psi3(x: f64) -> f64 {
    let s = (PI * (x + 1.0) * (x + 1.0)).sin();
    10.0 * s * s
}

pub fn psi5(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 <= 1.0 {
        (1.0 - r2).sqrt()
    } else {
        -1.0
    }
}

/// Printed form: the square applies to `(x-0.5)^2 + y - 0.5`.
pub fn psi6(x: f64, y: f64) -> f64 {
    let s = (x - 0.5).powi(2) + y - 0.5;
    (0.6 - 8.0 * s * s).max(0.0)
}

pub fn psi6_radial(x: f64, y: f64) -> f64 {
    (0.6 - 8.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).max(0.0)
}

pub fn psi7(x: f64) -> f64 {
    (0.7 - 15.0 * (x - 0.3).powi(2)).max(0.0)
}

pub fn phi7(x: f64) -> f64 {
    (15.0 * (x - 0.7).powi(2) + 0.3).min(1.0)
}

pub fn psi8(x: f64, y: f64) -> f64 {
    (0.95 - 35.0 * ((x - 0.25).powi(2) + (y - 0.25).powi(2))).max(0.0)
}

pub fn phi8(x: f64, y: f64) -> f64 {
    (35.0 * ((x - 0.75).powi(2) + (y - 0.75).powi(2))).min(1.0)
}

/// Disjoint bumps on `[0,1]^2`. The diamond and the disk are sampled
/// pointwise, plus the node whose cell holds each centre; the zero-width
/// segment is kept by including every node whose cell touches it.
fn psi4_field(grid: GridSpec) -> ScalarField {
    let h = grid.dx();
    let nearest = |c: f64, axis: usize| {
        let (a, _) = grid.extent(axis);
        (((c - a) / h).round() as usize).min(grid.cells(axis))
    };
    let diamond_center = grid.flat_index(nearest(0.5, 0), nearest(0.6, 1));
    let disk_center = grid.flat_index(nearest(0.6, 0), nearest(0.25, 1));
    let mut out = ScalarField::from_fn(grid, |p| {
        let (x, y) = (p[0], p[1]);
        let mut v: f64 = 0.0;
        if (x - 0.5).abs() + (y - 0.6).abs() < 0.04 {
            v = v.max(5.0);
        }
        if (x - 0.6).powi(2) + (y - 0.25).powi(2) < 0.001 {
            v = v.max(4.5);
        }
        let touches_segment =
            (y - 0.57).abs() <= 0.5 * h && x + 0.5 * h > 0.075 && x - 0.5 * h < 0.13;
        if touches_segment {
            v = v.max(4.5);
        }
        v
    });
    let vals = out.values_mut();
    vals[diamond_center] = vals[diamond_center].max(5.0);
    vals[disk_center] = vals[disk_center].max(4.5);
    out
}

/// Root of `r^2 (1 - ln(r/2)) = 1` in `(0, 1)` by bisection.
pub fn solve_rstar() -> f64 {
    let h = |r: f64| r * r * (1.0 - (r / 2.0).ln()) - 1.0;
    let (mut lo, mut hi) = (1e-3, 1.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn psi5_exact(rstar: f64) -> impl Fn(f64, f64) -> f64 {
    let coef = rstar * rstar / (1.0 - rstar * rstar).sqrt();
    move |x, y| {
        let r = (x * x + y * y).sqrt();
        if r <= rstar {
            (1.0 - r * r).sqrt()
        } else {
            -coef * (r / 2.0).ln()
        }
    }
}

pub fn psi1_exact(x: f64) -> f64 {
    let x = if x > 0.5 { 1.0 - x } else { x };
    let contact = 1.0 / (2.0 * 2f64.sqrt());
    if x <= contact {
        (100.0 - 50.0 * 2f64.sqrt()) * x
    } else {
        100.0 * x * (1.0 - x) - 12.5
    }
}

pub fn twophase_sym_exact(x: f64) -> f64 {
    if x <= -0.5 {
        -4.0 * x * x - 4.0 * x - 1.0
    } else if x < 0.5 {
        0.0
    } else {
        4.0 * x * x - 4.0 * x + 1.0
    }
}

/// Samples the closed-form solution of a preset.
pub fn exact_solution(name: &str, grid: GridSpec) -> Result<ScalarField> {
    match name {
        "psi1" => Ok(ScalarField::from_fn(grid, |p| psi1_exact(p[0]))),
        "psi5" => {
            let u = psi5_exact(solve_rstar());
            Ok(ScalarField::from_fn(grid, |p| u(p[0], p[1])))
        }
        "twophase-sym" => Ok(ScalarField::from_fn(grid, |p| twophase_sym_exact(p[0]))),
        "free-line" => Ok(ScalarField::from_fn(grid, |p| p[0])),
        other if PRESET_NAMES.contains(&other) => Err(Error::NoExactSolution(other.to_string())),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Builds a named benchmark problem with `cells` cells per axis.
pub fn preset(name: &str, cells: usize) -> Result<ProblemSpec> {
    let unit_line = || GridSpec::line(0.0, 1.0, cells);
    let unit_square = || GridSpec::square(0.0, 1.0, cells);
    let spec = |kind, grid: GridSpec, psi, phi, g, forces| ProblemSpec {
        name: name.to_string(),
        kind,
        grid,
        psi,
        phi,
        f: ScalarField::zeros(grid),
        g,
        forces,
        exact: None,
    };
    let mut problem = match name {
        "psi1" | "psi2" | "psi3" => {
            let grid = unit_line()?;
            let obstacle: fn(f64) -> f64 = match name {
                "psi1" => psi1,
                "psi2" => psi2,
                _ => psi3,
            };
            let psi = ScalarField::from_fn(grid, |p| obstacle(p[0]));
            let g = if name == "psi3" {
                BoundaryData::endpoints(grid, 5.0, 10.0)
            } else {
                BoundaryData::constant(grid, 0.0)
            };
            spec(ProblemKind::Linear, grid, Some(psi), None, g, None)
        }
        "psi4" => {
            let grid = unit_square()?;
            let psi = psi4_field(grid);
            spec(ProblemKind::Linear, grid, Some(psi), None, BoundaryData::constant(grid, 0.0), None)
        }
        "psi5" => {
            let grid = GridSpec::square(-2.0, 2.0, cells)?;
            let psi = ScalarField::from_fn(grid, |p| psi5(p[0], p[1]));
            let u = psi5_exact(solve_rstar());
            let g = BoundaryData::from_fn(grid, |p| u(p[0], p[1]));
            spec(ProblemKind::Linear, grid, Some(psi), None, g, None)
        }
        "psi6" | "psi6-radial" => {
            let grid = unit_square()?;
            let obstacle: fn(f64, f64) -> f64 = if name == "psi6" { psi6 } else { psi6_radial };
            let psi = ScalarField::from_fn(grid, |p| obstacle(p[0], p[1]));
            spec(
                ProblemKind::Nonlinear,
                grid,
                Some(psi),
                None,
                BoundaryData::constant(grid, 0.0),
                None,
            )
        }
        "double1d" => {
            let grid = unit_line()?;
            let psi = ScalarField::from_fn(grid, |p| psi7(p[0]));
            let phi = ScalarField::from_fn(grid, |p| phi7(p[0]));
            let g = BoundaryData::endpoints(grid, 0.0, 1.0);
            spec(ProblemKind::Double, grid, Some(psi), Some(phi), g, None)
        }
        "double2d" => {
            let grid = unit_square()?;
            let psi = ScalarField::from_fn(grid, |p| psi8(p[0], p[1]));
            let phi = ScalarField::from_fn(grid, |p| phi8(p[0], p[1]));
            let g = BoundaryData::constant(grid, 0.5);
            spec(ProblemKind::Double, grid, Some(psi), Some(phi), g, None)
        }
        "twophase-sym" | "twophase-asym" => {
            let grid = GridSpec::line(-1.0, 1.0, cells)?;
            let forces = if name == "twophase-sym" { (8.0, 8.0) } else { (2.0, 1.0) };
            let g = BoundaryData::endpoints(grid, -1.0, 1.0);
            spec(ProblemKind::TwoPhase, grid, None, None, g, Some(forces))
        }
        "free-line" => {
            // no obstacle at all: the discrete solution is the line u = x
            let grid = unit_line()?;
            let psi = ScalarField::constant(grid, f64::NEG_INFINITY);
            let g = BoundaryData::endpoints(grid, 0.0, 1.0);
            spec(ProblemKind::Linear, grid, Some(psi), None, g, None)
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    if EXACT_NAMES.contains(&name) {
        problem.exact = Some(exact_solution(name, problem.grid)?);
    }
    Ok(problem)
}

/// Tolerance below which a value counts as sitting on the level set.
pub const PLATEAU_TOL: f64 = 1e-9;

/// Locations where a 1D field meets `level`: linearly interpolated sign
/// changes between off-level nodes, and both ends of every run of nodes
/// within [`PLATEAU_TOL`] of the level (a single on-level node is reported
/// once). Sorted ascending.
pub fn free_boundary_1d(u: &ScalarField, level: f64) -> Vec<f64> {
    let grid = u.grid();
    let v: Vec<f64> = u.values().iter().map(|x| x - level).collect();
    let x = |k: usize| grid.coord(0, k);
    let on = |k: usize| v[k].abs() <= PLATEAU_TOL;
    let mut out = Vec::new();
    let n = v.len();
    let mut k = 0;
    while k < n {
        if on(k) {
            let start = k;
            while k + 1 < n && on(k + 1) {
                k += 1;
            }
            out.push(x(start));
            if k > start {
                out.push(x(k));
            }
        } else if k + 1 < n && !on(k + 1) && v[k].signum() != v[k + 1].signum() {
            let t = v[k] / (v[k] - v[k + 1]);
            out.push(x(k) + t * (x(k + 1) - x(k)));
        }
        k += 1;
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi1_values() {
        let p = preset("psi1", 256).unwrap();
        let psi = p.psi.as_ref().unwrap();
        assert!((psi.values()[128] - 12.5).abs() < 1e-12);
        assert_eq!(p.g.values(), &[0.0, 0.0]);
    }

    #[test]
    fn psi5_values() {
        let p = preset("psi5", 256).unwrap();
        let psi = p.psi.as_ref().unwrap();
        let origin = p.grid.flat_index(128, 128);
        assert_eq!(psi.values()[origin], 1.0);
        assert_eq!(psi.values()[p.grid.flat_index(256, 256)], -1.0);
        assert!(p.exact.is_some());
        assert!(p.g.matches(p.exact.as_ref().unwrap().values()));
    }

    #[test]
    fn psi3_boundary() {
        let p = preset("psi3", 256).unwrap();
        assert_eq!(p.g.values(), &[5.0, 10.0]);
    }

    #[test]
    fn rstar_root() {
        let r = solve_rstar();
        assert!((r - 0.6979651482).abs() < 1e-9);
        assert!((r * r * (1.0 - (r / 2.0).ln()) - 1.0).abs() <= 1e-10);
        let h = |r: f64| r * r * (1.0 - (r / 2.0).ln()) - 1.0;
        assert!(h(0.5) * h(0.9) < 0.0);
    }

    #[test]
    fn psi1_exact_is_continuous_at_contact() {
        let c = 1.0 / (2.0 * 2f64.sqrt());
        let left = (100.0 - 50.0 * 2f64.sqrt()) * c;
        let right = 100.0 * c * (1.0 - c) - 12.5;
        assert!((left - right).abs() < 1e-12);
        assert!((psi1_exact(c) - left).abs() < 1e-12);
    }

    #[test]
    fn psi5_exact_at_unit_radius() {
        let r = solve_rstar();
        let u = psi5_exact(r);
        let expect = -(r * r) * (0.5f64).ln() / (1.0 - r * r).sqrt();
        assert!((u(1.0, 0.0) - expect).abs() < 1e-14);
        // C^1 across r*: one-sided slopes agree to O(h)
        let h = 1e-4;
        let inner = (u(r, 0.0) - u(r - h, 0.0)) / h;
        let outer = (u(r + h, 0.0) - u(r, 0.0)) / h;
        assert!((inner - outer).abs() < 1e-3, "{inner} vs {outer}");
        assert!((u(r - 1e-12, 0.0) - u(r + 1e-12, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn twophase_exact_center() {
        let grid = GridSpec::line(-1.0, 1.0, 256).unwrap();
        let u = exact_solution("twophase-sym", grid).unwrap();
        assert_eq!(u.values()[128], 0.0);
        assert_eq!(u.values()[256], 1.0);
        assert_eq!(u.values()[0], -1.0);
    }

    #[test]
    fn exact_solution_errors() {
        let grid = GridSpec::line(0.0, 1.0, 8).unwrap();
        assert!(matches!(exact_solution("psi2", grid), Err(Error::NoExactSolution(_))));
        assert!(matches!(exact_solution("nope", grid), Err(Error::UnknownPreset(_))));
        assert!(matches!(preset("nope", 8), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn presets_are_valid_and_deterministic() {
        for name in PRESET_NAMES {
            let a = preset(name, 32).unwrap();
            let b = preset(name, 32).unwrap();
            a.validate().unwrap();
            assert_eq!(a.psi, b.psi);
            assert_eq!(a.phi, b.phi);
            assert_eq!(a.g, b.g);
            if let (Some(lo), Some(hi)) = (&a.psi, &a.phi) {
                assert!(lo.values().iter().zip(hi.values()).all(|(l, h)| l <= h));
            }
        }
    }

    #[test]
    fn psi4_features_survive_coarse_grids() {
        for m in [16, 32, 64, 256] {
            let p = preset("psi4", m).unwrap();
            let psi = p.psi.unwrap();
            let count = |level: f64| psi.values().iter().filter(|&&v| v == level).count();
            assert!(count(5.0) >= 1, "diamond lost at M={m}");
            // disk plus segment
            assert!(count(4.5) >= 2, "4.5 features lost at M={m}");
        }
    }

    #[test]
    fn free_boundary_examples() {
        let grid = GridSpec::line(0.0, 1.0, 10).unwrap();
        let u = ScalarField::from_fn(grid, |x| x[0] - 0.5);
        assert_eq!(free_boundary_1d(&u, 0.0), vec![0.5]);
        let u = ScalarField::from_fn(grid, |x| x[0] - 0.45);
        let fb = free_boundary_1d(&u, 0.0);
        assert_eq!(fb.len(), 1);
        assert!((fb[0] - 0.45).abs() < 1e-12);
        assert_eq!(free_boundary_1d(&ScalarField::zeros(grid), 0.0), vec![0.0, 1.0]);
        let sym = exact_solution("twophase-sym", GridSpec::line(-1.0, 1.0, 256).unwrap()).unwrap();
        let fb = free_boundary_1d(&sym, 0.0);
        assert_eq!(fb, vec![-0.5, 0.5]);
        let none = ScalarField::constant(grid, 2.0);
        assert!(free_boundary_1d(&none, 0.0).is_empty());
    }
}
