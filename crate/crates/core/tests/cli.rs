use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cade_core::catalog::preset;
use cade_core::io::{read_field, write_field};
use cade_core::solvers::{solve, SolverConfig};

fn cade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cade"))
        .args(args)
        .output()
        .expect("run cade")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn solve_psi1_matches_table_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = cade(&["solve", "--problem", "psi1", "--cells", "256", "--dt-factor", "0.1", "--tol", "1e-11", "--out", out]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let s = summary(dir.path());
    for key in ["problem", "M", "dx", "dt", "iterations", "converged", "l2_err", "linf_err", "free_boundary"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    let its = s["iterations"].as_f64().unwrap();
    assert!((its - 1201.0).abs() <= 0.35 * 1201.0, "{its}");
    assert_eq!(s["M"], 256);
    let hist = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert!(hist.starts_with("iter,linf_diff,l2_err,linf_err\n"));
    assert_eq!(hist.lines().count() as f64, its + 1.0);
    let u = read_field(&dir.path().join("solution.csv")).unwrap();
    assert_eq!(u.grid().cells(0), 256);
}

#[test]
fn solve_psi5_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = cade(&["solve", "--problem", "psi5", "--cells", "64", "--dt-factor", "1.0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let l2 = summary(dir.path())["l2_err"].as_f64().unwrap();
    assert!((l2 - 5.85e-4).abs() <= 0.25 * 5.85e-4, "{l2}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let capped = cade(&["solve", "--problem", "psi1", "--cells", "64", "--max-outer", "5", "--out", out]);
    assert_eq!(code(&capped), 2);
    assert_eq!(summary(dir.path())["converged"], false);

    for (args, key) in [
        (vec!["--problem", "psi1", "--cells", "64", "--alpha", "-1"], "--alpha"),
        (vec!["--problem", "psi1", "--cells", "64", "--tol", "0"], "--tol"),
        (vec!["--problem", "nosuch", "--cells", "64"], "--problem"),
        (vec!["--problem", "psi1"], "--cells"),
        (vec!["--problem", "psi1", "--cells", "64", "--kind", "elastic"], "--kind"),
    ] {
        let mut full = vec!["solve", "--out", out];
        full.extend(args);
        let r = cade(&full);
        assert_eq!(code(&r), 1, "{full:?}");
        assert!(stderr(&r).contains(key), "{key}: {}", stderr(&r));
    }
    let r = cade(&["solve", "--problem", "psi1", "--cells", "64", "--sweeps", "3", "--out", out]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("--sweeps"));
    assert_eq!(code(&cade(&["--help"])), 0);
}

#[test]
fn outputs_are_deterministic_unless_stamped() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let r = cade(&["solve", "--problem", "double1d", "--cells", "64", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
    }
    for f in ["solution.csv", "history.csv", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let r = cade(&["solve", "--problem", "double1d", "--cells", "64", "--stamp", "--out", b.path().to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert!(fs::read_to_string(b.path().join("history.csv")).unwrap().starts_with("# created unix="));
    assert!(summary(b.path()).get("stamp").is_some());
    assert!(summary(a.path()).get("stamp").is_none());
}

#[test]
fn convergence_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = cade(&["convergence", "--problem", "psi1", "--levels", "64,128,256,512", "--out", out]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("M,dx,l2,linf\n"));
    assert_eq!(csv.lines().count(), 5);
    let orders = fs::read_to_string(dir.path().join("orders.csv")).unwrap();
    let linf: f64 = orders
        .lines()
        .find(|l| l.starts_with("linf,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(linf >= 1.5, "{linf}");

    let r = cade(&["convergence", "--problem", "free-line", "--levels", "8,16,32", "--out", out]);
    assert_eq!(code(&r), 0);
    let orders = fs::read_to_string(dir.path().join("orders.csv")).unwrap();
    assert!(orders.contains("l2,NA,NA") && orders.contains("linf,NA,NA"), "{orders}");

    let r = cade(&["convergence", "--problem", "psi2", "--out", out]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("--problem"));
}

#[test]
fn oracle_check_examples() {
    let r = cade(&["oracle-check", "--seed", "1", "--count", "100", "-M", "16"]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stdout));
    assert_eq!(code(&cade(&["oracle-check", "--count", "0"])), 0);
    for sweeps in ["2", "4"] {
        let r = cade(&["oracle-check", "--count", "25", "-M", "8", "--dim", "2", "--sweeps", sweeps]);
        assert_eq!(code(&r), 0, "sweeps {sweeps}: {}", String::from_utf8_lossy(&r.stdout));
    }
    assert_eq!(code(&cade(&["oracle-check", "--dim", "3"])), 1);
}

#[test]
fn problem_file_reproduces_preset() {
    let dir = tempfile::tempdir().unwrap();
    let p = preset("psi3", 64).unwrap();
    write_field(&dir.path().join("psi.csv"), p.psi.as_ref().unwrap()).unwrap();
    let mut g = p.f.clone();
    for (&k, &v) in p.g.indices().iter().zip(p.g.values()) {
        g.values_mut()[k] = v;
    }
    write_field(&dir.path().join("g.csv"), &g).unwrap();
    let json = dir.path().join("problem.json");
    fs::write(&json, r#"{"name": "mine", "kind": "linear", "psi": "psi.csv", "g": "g.csv"}"#).unwrap();
    let out = dir.path().join("out");
    let problem = format!("@{}", json.display());
    let r = cade(&["solve", "--problem", &problem, "--dt-factor", "0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let from_file = read_field(&out.join("solution.csv")).unwrap();
    let direct = solve(&p, &SolverConfig::new(0.1 / 64.0)).unwrap();
    assert_eq!(from_file.values(), direct.u_final.values());
    assert_eq!(summary(&out)["problem"], "mine");

    fs::write(&json, r#"{"kind": "linear", "psi": "missing.csv"}"#).unwrap();
    let r = cade(&["solve", "--problem", &problem, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("`psi`"), "{}", stderr(&r));
    fs::write(&json, r#"{"kind": "linear", "psi": "psi.csv", "colour": 1}"#).unwrap();
    let r = cade(&["solve", "--problem", &problem, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("colour"), "{}", stderr(&r));
}

#[test]
fn two_phase_reports_interfaces() {
    let dir = tempfile::tempdir().unwrap();
    let r = cade(&["solve", "--problem", "twophase-sym", "--cells", "256", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let s = summary(dir.path());
    let fb: Vec<f64> = s["free_boundary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(fb.len(), 2, "{fb:?}");
    assert!((fb[0] + fb[1]).abs() < 1e-12, "{fb:?}");
    // between the interfaces the shrinkage zeroes v, so |u| stays within
    // the threshold lambda2 / alpha = 8 / 500
    let u = read_field(&dir.path().join("solution.csv")).unwrap();
    for (k, &v) in u.values().iter().enumerate() {
        let x = u.grid().coord(0, k);
        if x > fb[0] && x < fb[1] {
            assert!(v.abs() <= 8.0 / 500.0 + 1e-9, "x={x} u={v}");
        }
    }
}

#[test]
fn reproduce_table1() {
    let dir = tempfile::tempdir().unwrap();
    let r = cade(&["reproduce", "table1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let its: Vec<usize> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for (got, want) in its.iter().zip([299.0, 595.0, 1201.0, 2363.0]) {
        assert!((*got as f64 - want).abs() <= 0.35 * want, "{got} vs {want}");
    }
    assert!(dir.path().join("psi1_M512/summary.json").exists());
    assert_eq!(code(&cade(&["reproduce", "table9"])), 1);
}
