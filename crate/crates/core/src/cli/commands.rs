use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::{
    ConvergenceArgs, Experiment, OracleCheckArgs, ReproduceArgs, SolveArgs, SolverArgs, EXIT_CAP,
    EXIT_OK,
};
use crate::ade::{cade_step_with, Sweeps};
use crate::catalog::EXACT_NAMES;
use crate::io::{fmt_f64, write_atomic, write_field};
use crate::metrics::{error_l2, error_linf, ConvergenceStudy, FittedOrders};
use crate::oracle::{oracle_solve, random_instance, RandomInstanceOptions};
use crate::solvers::{solve, SolverConfig};

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub dx: f64,
    pub dt: f64,
    pub iterations: usize,
    pub converged: bool,
    pub l2_err: Option<f64>,
    pub linf_err: Option<f64>,
    pub free_boundary: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp: Option<u64>,
}

fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn stamp_line(stamp: bool) -> String {
    if stamp {
        format!("# created unix={}\n", unix_time())
    } else {
        String::new()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> String {
    format!("--out: {}: {e}", path.display())
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    write_atomic(path, text.as_bytes()).map_err(|e| io_err(path, e))
}

/// Runs one configured problem and writes `solution.csv`, `history.csv`
/// and `summary.json` into `out`.
pub fn run_and_write(run: &RunConfig, out: &Path, stamp: bool) -> Result<RunSummary, String> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let report = solve(&run.problem, &run.solver).map_err(|e| e.to_string())?;

    let (l2_err, linf_err) = match &run.problem.exact {
        Some(ex) => (
            Some(error_l2(&report.u_final, ex).map_err(|e| e.to_string())?),
            Some(error_linf(&report.u_final, ex).map_err(|e| e.to_string())?),
        ),
        None => (None, None),
    };

    let path = out.join("solution.csv");
    write_field(&path, &report.u_final).map_err(|e| io_err(&path, e))?;

    let mut hist = stamp_line(stamp);
    let with_errors = !report.error_history.is_empty();
    hist.push_str(if with_errors {
        "iter,linf_diff,l2_err,linf_err\n"
    } else {
        "iter,linf_diff\n"
    });
    for (n, d) in report.diff_history.iter().enumerate() {
        write!(hist, "{},{}", n + 1, fmt_f64(*d)).unwrap();
        if let Some(&(a, b)) = report.error_history.get(n) {
            write!(hist, ",{},{}", fmt_f64(a), fmt_f64(b)).unwrap();
        }
        hist.push('\n');
    }
    write_text(&out.join("history.csv"), &hist)?;

    let summary = RunSummary {
        problem: run.problem.name.clone(),
        m: run.cells,
        dx: run.problem.grid.dx(),
        dt: run.solver.dt,
        iterations: report.iterations,
        converged: report.converged,
        l2_err,
        linf_err,
        free_boundary: report.free_boundary,
        stamp: stamp.then(unix_time),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    write_text(&out.join("summary.json"), &(json + "\n"))?;
    Ok(summary)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<RunSummary, String> {
    let run = RunConfig::resolve(&args.solver, args.cells)?;
    let summary = run_and_write(&run, &args.out, args.stamp)?;
    println!(
        "{}: M={} iterations={} converged={}{}",
        summary.problem,
        summary.m,
        summary.iterations,
        summary.converged,
        summary
            .linf_err
            .map(|e| format!(" linf_err={e:e}"))
            .unwrap_or_default()
    );
    if let Some(fb) = &summary.free_boundary {
        println!("free boundary: {fb:?}");
    }
    Ok(summary)
}

/// Errors smaller than this are round-off; no order is fitted through them.
pub const ROUND_OFF: f64 = 1e-13;

fn fmt_order(o: Option<f64>) -> String {
    o.map(|v| v.to_string()).unwrap_or_else(|| "NA".into())
}

/// Runs every level (in parallel), writes `convergence.csv` and `orders.csv`.
/// Returns the study, the fitted orders and whether every level converged.
pub fn run_convergence(
    args: &SolverArgs,
    levels: &[usize],
    out: &Path,
    stamp: bool,
) -> Result<(ConvergenceStudy, FittedOrders, bool), String> {
    if args.problem.starts_with('@') || !EXACT_NAMES.contains(&args.problem.as_str()) {
        return Err(format!(
            "--problem: `{}` has no exact solution; choose one of {}",
            args.problem,
            EXACT_NAMES.join(", ")
        ));
    }
    if levels.len() < 2 {
        return Err("--levels: need at least two levels".into());
    }
    let runs = levels
        .iter()
        .map(|&m| RunConfig::resolve(args, Some(m)))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = runs
            .iter()
            .map(|run| s.spawn(move || solve(&run.problem, &run.solver)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread")).collect()
    });
    let mut study = ConvergenceStudy::default();
    let mut all_converged = true;
    for (run, res) in runs.iter().zip(results) {
        let report = res.map_err(|e| e.to_string())?;
        all_converged &= report.converged;
        let ex = run.problem.exact.as_ref().expect("exact preset");
        let l2 = error_l2(&report.u_final, ex).map_err(|e| e.to_string())?;
        let linf = error_linf(&report.u_final, ex).map_err(|e| e.to_string())?;
        study.push(run.cells, run.problem.grid.dx(), l2, linf);
    }
    let degenerate = |e: &[f64]| e.iter().any(|&v| v <= ROUND_OFF);
    let keep = |o: Option<f64>, e: &[f64]| if degenerate(e) { None } else { o };
    let fitted = study.fitted();
    let ls = study.least_squares();
    let fitted = FittedOrders {
        l2: keep(fitted.l2, &study.errors_l2),
        linf: keep(fitted.linf, &study.errors_linf),
    };
    let ls = FittedOrders {
        l2: keep(ls.l2, &study.errors_l2),
        linf: keep(ls.linf, &study.errors_linf),
    };

    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut csv = stamp_line(stamp);
    csv.push_str("M,dx,l2,linf\n");
    for k in 0..study.levels.len() {
        writeln!(
            csv,
            "{},{},{},{}",
            study.levels[k],
            fmt_f64(study.dx[k]),
            fmt_f64(study.errors_l2[k]),
            fmt_f64(study.errors_linf[k])
        )
        .unwrap();
    }
    write_text(&out.join("convergence.csv"), &csv)?;
    let mut orders = stamp_line(stamp);
    orders.push_str("norm,order,least_squares\n");
    writeln!(orders, "l2,{},{}", fmt_order(fitted.l2), fmt_order(ls.l2)).unwrap();
    writeln!(orders, "linf,{},{}", fmt_order(fitted.linf), fmt_order(ls.linf)).unwrap();
    write_text(&out.join("orders.csv"), &orders)?;
    print!("{csv}{orders}");
    Ok((study, fitted, all_converged))
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<i32, String> {
    let (_, _, ok) = run_convergence(&args.solver, &args.levels, &args.out, args.stamp)?;
    Ok(if ok { EXIT_OK } else { EXIT_CAP })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleCheckSummary {
    pub count: usize,
    /// Worst `||step(u*) - u*||_inf / ||u*||_inf`.
    pub worst_fixed_point: f64,
    /// Worst `||u_solver - u*||_inf`.
    pub worst_agreement: f64,
    /// Seeds of the instances that violated a check.
    pub failures: Vec<u64>,
}

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-15;
const ORACLE_CAP: usize = 10_000_000;
const SOLVER_TOL: f64 = 1e-11;

/// Instance `k` is drawn from `ChaCha8Rng::seed_from_u64(seed + k)`; odd
/// instances carry an upper obstacle. For each: the reference solution must
/// be a fixed point of one constrained step (`dt = dx`) and the iterative
/// solver (`dt = dx`, tol `1e-11`) must land within `10 tol` of it.
pub fn cmd_oracle_check(args: &OracleCheckArgs) -> Result<OracleCheckSummary, String> {
    let sweeps = Sweeps::from_count(args.sweeps.parse().map_err(|_| "--sweeps: must be 2 or 4")?)
        .ok_or("--sweeps: must be 2 or 4")?;
    if args.cells < 2 {
        return Err("--cells: need at least 2 cells".into());
    }
    let mut summary = OracleCheckSummary {
        count: args.count,
        ..Default::default()
    };
    for k in 0..args.count as u64 {
        let seed = args.seed.wrapping_add(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(
            &mut rng,
            RandomInstanceOptions {
                dim: args.dim as usize,
                cells: args.cells,
                upper: k % 2 == 1,
                unit_coeffs: true,
            },
        );
        let dx = inst.grid.dx();
        let fixed = oracle_solve(&inst, ORACLE_TOL, ORACLE_CAP)
            .and_then(|u| {
                let stepped =
                    cade_step_with(inst.coeffs, &u, &inst.f, &inst.bounds, &inst.g, dx, sweeps)?;
                Ok((stepped.sup_distance(&u) / u.sup_norm().max(f64::MIN_POSITIVE), u))
            })
            .and_then(|(dev, u)| {
                let problem = inst.to_problem("random")?;
                let cfg = SolverConfig::new(dx).with_tol(SOLVER_TOL).with_sweeps(sweeps);
                let report = solve(&problem, &cfg)?;
                Ok((dev, report.u_final.sup_distance(&u), report.converged))
            });
        match fixed {
            Ok((dev, gap, converged)) => {
                summary.worst_fixed_point = summary.worst_fixed_point.max(dev);
                summary.worst_agreement = summary.worst_agreement.max(gap);
                if !(dev < FIXED_POINT_TOL && gap <= 10.0 * SOLVER_TOL && converged) {
                    eprintln!("violation: seed {seed} fixed-point {dev:e} agreement {gap:e} converged {converged}");
                    summary.failures.push(seed);
                }
            }
            Err(e) => {
                eprintln!("violation: seed {seed}: {e}");
                summary.failures.push(seed);
            }
        }
    }
    println!(
        "instances={} worst_fixed_point={:e} worst_agreement={:e} failures={:?}",
        summary.count, summary.worst_fixed_point, summary.worst_agreement, summary.failures
    );
    Ok(summary)
}

fn preset_args(name: &str) -> SolverArgs {
    SolverArgs {
        problem: name.into(),
        ..Default::default()
    }
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> Result<i32, String> {
    let out = &args.out;
    let mut ok = true;
    match args.which {
        Experiment::Table1 => {
            fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
            let mut csv = stamp_line(args.stamp);
            csv.push_str("dx,M,iterations,converged,linf_err\n");
            for m in [64, 128, 256, 512] {
                let run = RunConfig::resolve(&preset_args("psi1"), Some(m))?;
                let s = run_and_write(&run, &out.join(format!("psi1_M{m}")), args.stamp)?;
                ok &= s.converged;
                writeln!(
                    csv,
                    "{},{m},{},{},{}",
                    fmt_f64(s.dx),
                    s.iterations,
                    s.converged,
                    fmt_f64(s.linf_err.unwrap_or(f64::NAN))
                )
                .unwrap();
            }
            write_text(&out.join("table1.csv"), &csv)?;
            print!("{csv}");
        }
        Experiment::Table2 => {
            let (_, _, all) =
                run_convergence(&preset_args("psi5"), &[32, 64, 128, 256], out, args.stamp)?;
            ok = all;
        }
        Experiment::FigPsi5 => {
            let run = RunConfig::resolve(&preset_args("psi5"), Some(256))?;
            ok = run_and_write(&run, out, args.stamp)?.converged;
        }
        Experiment::FigTwophase => {
            for (name, dir) in [("twophase-sym", "sym"), ("twophase-asym", "asym")] {
                let run = RunConfig::resolve(&preset_args(name), Some(256))?;
                let s = run_and_write(&run, &out.join(dir), args.stamp)?;
                println!("{name}: iterations={} free boundary {:?}", s.iterations, s.free_boundary);
                ok &= s.converged;
            }
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_CAP })
}
