//! Resolution of command-line options into a problem and solver settings.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::SolverArgs;
use crate::ade::Sweeps;
use crate::catalog::{preset, ProblemKind, ProblemSpec};
use crate::error::Error;
use crate::grid::{BoundaryData, GridSpec, ScalarField};
use crate::io::read_field;
use crate::solvers::SolverConfig;

/// A problem assembled from field files, given as `--problem @file.json`.
/// Paths are relative to the JSON file. The grid comes from the fields,
/// which must all agree; `g` takes the boundary values of its field and
/// defaults to zero.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub kind: String,
    pub psi: Option<PathBuf>,
    pub phi: Option<PathBuf>,
    pub f: Option<PathBuf>,
    pub g: Option<PathBuf>,
    pub forces: Option<(f64, f64)>,
    pub exact: Option<PathBuf>,
}

/// Everything a run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
    pub cells: usize,
}

fn key_error(key: &str, e: impl std::fmt::Display) -> String {
    format!("--{key}: {e}")
}

pub fn load_problem_file(path: &Path) -> Result<ProblemSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| key_error("problem", format!("{}: {e}", path.display())))?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| key_error("problem", format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let load = |key: &str, p: &Option<PathBuf>| -> Result<Option<ScalarField>, String> {
        p.as_ref()
            .map(|p| read_field(&base.join(p)).map_err(|e| format!("problem file key `{key}`: {e}")))
            .transpose()
    };
    let kind: ProblemKind = file
        .kind
        .parse()
        .map_err(|e| format!("problem file key `kind`: {e}"))?;
    let psi = load("psi", &file.psi)?;
    let phi = load("phi", &file.phi)?;
    let f = load("f", &file.f)?;
    let g = load("g", &file.g)?;
    let exact = load("exact", &file.exact)?;
    let grid: GridSpec = *[&psi, &phi, &f, &g, &exact]
        .into_iter()
        .flatten()
        .next()
        .ok_or("problem file needs at least one field (psi, phi, f, g or exact)")?
        .grid();
    for (key, field) in [("psi", &psi), ("phi", &phi), ("f", &f), ("g", &g), ("exact", &exact)] {
        if let Some(u) = field {
            if u.grid() != &grid {
                return Err(format!("problem file key `{key}`: {}", Error::GridMismatch));
            }
        }
    }
    let problem = ProblemSpec {
        name: file.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "problem".into())
        }),
        kind,
        grid,
        psi,
        phi,
        f: f.unwrap_or_else(|| ScalarField::zeros(grid)),
        g: g.map(|u| BoundaryData::from_field(&u))
            .unwrap_or_else(|| BoundaryData::constant(grid, 0.0)),
        forces: file.forces,
        exact,
    };
    problem
        .validate()
        .map_err(|e| format!("problem file {}: {e}", path.display()))?;
    Ok(problem)
}

impl RunConfig {
    /// Builds the problem (preset at `cells`, or a problem file) and applies
    /// the overrides on top of the per-problem defaults.
    pub fn resolve(args: &SolverArgs, cells: Option<usize>) -> Result<Self, String> {
        let mut problem = if let Some(path) = args.problem.strip_prefix('@') {
            if cells.is_some() {
                return Err(key_error("cells", "not allowed with a problem file; the grid comes from its fields"));
            }
            load_problem_file(Path::new(path))?
        } else {
            let cells = cells.ok_or_else(|| key_error("cells", "required for preset problems"))?;
            preset(&args.problem, cells).map_err(|e| match e {
                Error::UnknownPreset(_) => key_error("problem", e),
                other => key_error("cells", other),
            })?
        };
        if let Some(kind) = &args.kind {
            let kind: ProblemKind = kind.parse().map_err(|e| key_error("kind", e))?;
            if kind == ProblemKind::TwoPhase && problem.forces.is_none() {
                return Err(key_error("kind", "two-phase needs forces, which this problem lacks"));
            }
            problem = problem.with_kind(kind);
        }
        Self::with_overrides(problem, args)
    }

    pub fn with_overrides(problem: ProblemSpec, args: &SolverArgs) -> Result<Self, String> {
        let dx = problem.grid.dx();
        let mut cfg = SolverConfig::for_problem(&problem);
        match (args.dt, args.dt_factor) {
            (Some(dt), _) => cfg.dt = dt,
            (None, Some(r)) => cfg.dt = r * dx,
            (None, None) => {}
        }
        if let Some(a) = args.alpha {
            cfg = cfg.with_alpha(a);
        }
        if let Some(t) = args.tol {
            cfg = cfg.with_tol(t);
        }
        if let Some(g) = args.gamma {
            cfg = cfg.with_gamma(g);
        }
        if let Some(e) = args.eps1 {
            cfg.eps1 = e;
        }
        if let Some(cap) = args.max_outer {
            cfg = cfg.with_max_outer(cap);
        }
        if let Some(s) = &args.sweeps {
            let n: u32 = s.parse().map_err(|e| key_error("sweeps", e))?;
            cfg = cfg.with_sweeps(Sweeps::from_count(n).ok_or_else(|| key_error("sweeps", "must be 2 or 4"))?);
        }
        if problem.exact.is_some() {
            cfg = cfg.recording_errors();
        }
        cfg.validate().map_err(|e| match &e {
            Error::InvalidParameter { name, .. } => {
                let key = match *name {
                    "dt" if args.dt.is_none() => "dt-factor".to_string(),
                    "max_outer" => "max-outer".to_string(),
                    other => other.to_string(),
                };
                key_error(&key, e)
            }
            _ => e.to_string(),
        })?;
        let cells = problem.grid.cells(0);
        Ok(RunConfig {
            problem,
            solver: cfg,
            cells,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(problem: &str) -> SolverArgs {
        SolverArgs {
            problem: problem.into(),
            ..Default::default()
        }
    }

    #[test]
    fn published_defaults() {
        let r = RunConfig::resolve(&args("psi1"), Some(64)).unwrap();
        assert!((r.solver.dt - 0.1 / 64.0).abs() < 1e-18);
        assert_eq!(r.solver.tol, 1e-11);
        let r = RunConfig::resolve(&args("psi5"), Some(32)).unwrap();
        assert_eq!(r.solver.dt, r.problem.grid.dx());
        let r = RunConfig::resolve(&args("twophase-sym"), Some(256)).unwrap();
        assert_eq!((r.solver.alpha, r.solver.tol), (500.0, 1e-10));
        let mut a = args("psi2");
        a.kind = Some("nonlinear".into());
        let r = RunConfig::resolve(&a, Some(256)).unwrap();
        assert_eq!(r.solver.alpha, 0.01);
        assert!((r.solver.dt - 10.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::resolve(&args("nope"), Some(8)).unwrap_err();
        assert!(e.starts_with("--problem"), "{e}");
        let e = RunConfig::resolve(&args("psi1"), None).unwrap_err();
        assert!(e.starts_with("--cells"), "{e}");
        let e = RunConfig::resolve(&args("psi1"), Some(1)).unwrap_err();
        assert!(e.starts_with("--cells"), "{e}");
        let mut a = args("psi1");
        a.alpha = Some(-1.0);
        assert!(RunConfig::resolve(&a, Some(8)).unwrap_err().starts_with("--alpha"));
        let mut a = args("psi1");
        a.dt_factor = Some(0.0);
        assert!(RunConfig::resolve(&a, Some(8)).unwrap_err().starts_with("--dt-factor"));
        let mut a = args("psi1");
        a.kind = Some("two-phase".into());
        assert!(RunConfig::resolve(&a, Some(8)).unwrap_err().starts_with("--kind"));
    }
}
