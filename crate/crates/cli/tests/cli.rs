use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mahler-kernels")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn sidecar(p: &Path) -> std::path::PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

#[test]
fn expected_counts_for_small_real_ensemble() {
    let o = run(&["expected", "--n", "2", "--s", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let counts = &v["counts"];
    assert_eq!(counts["E_in"].as_f64().unwrap(), 1.95);
    assert!((counts["E_in_quadrature"].as_f64().unwrap() - 1.95).abs() < 1e-6);
    assert!(counts["E_out"].as_f64().unwrap() > 0.0);
    assert!((counts["total"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["config"]["ensembles"][0]["n"], 2);
}

#[test]
fn verify_passes_and_flags_a_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = run(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"][0]["residual"].is_number());

    let o = run(&["verify", "--perturb", "3:1e-3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let v = read_json(&out);
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert!(failed.iter().any(|c| c["group"] == "skew-orthonormality"));
}

#[test]
fn edge_density_grid_is_finite_and_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edge.csv");
    let o = run(&[
        "density-grid", "--n", "64", "--s", "65", "--field", "complex", "--regime", "limit-edge", "--lambda", "1",
        "--grid=-6,2,-4,4,24,24", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 24 * 24);
    assert!(rows.iter().all(|r| r[2].is_finite() && r[2] >= 0.0));
    let meta = read_json(&sidecar(&out));
    assert_eq!(meta["config"]["command"], "density-grid");
    assert_eq!(meta["limit_params"]["lambda"], 1.0);
}

#[test]
fn finite_real_density_grid_shows_the_cleft() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("real.csv");
    let o = run(&["density-grid", "--n", "16", "--s", "24", "--regime", "finite", "--grid=-1.5,1.5,-0.3,0.3,7,76", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    let nearest = rows.iter().map(|r| r[1].abs()).fold(f64::INFINITY, f64::min);
    for x in rows.iter().filter(|r| r[1] == rows[0][1]).map(|r| r[0]) {
        let column: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == x).collect();
        let max = column.iter().map(|r| r[2]).fold(0.0, f64::max);
        let near = column.iter().find(|r| r[1].abs() == nearest).unwrap()[2];
        assert!(near < 0.5 * max, "x = {x}");
    }
}

#[test]
fn validation_errors_exit_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["density-grid", "--n", "4", "--s", "8", "--regime", "finite", "--grid=0,1,0,1,0,3", "--out", out],
        vec!["density-grid", "--n", "4", "--s", "8", "--regime", "sideways", "--grid=0,1,0,1,3,3", "--out", out],
        vec!["expected", "--n", "3", "--s", "10"],
        vec!["expected", "--n", "4", "--s", "3"],
        vec!["converge", "--regime", "bulk", "--ns", "32,16", "--out", out],
        vec!["sample", "--n", "2", "--s", "2.5", "--count", "3", "--out", out],
        vec!["no-such-command"],
    ];
    for args in cases {
        assert_eq!(code(&run(&args)), 1, "{args:?}");
    }
    assert!(!Path::new(out).exists(), "no partial output after a validation error");
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_mahler-kernels"))
        .args(["expected", "--n", "2", "--s", "10"])
        .env("MAHLER_KERNELS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_mahler-kernels"))
        .args(["expected", "--n", "2", "--s", "10"])
        .env("MAHLER_KERNELS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let o = run(&["sample", "--n", "2", "--s", "10", "--seed", "11", "--count", "50", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 50);
    for line in text.lines() {
        let s: Value = serde_json::from_str(line).unwrap();
        assert_eq!(s["roots"].as_array().unwrap().len(), 2);
        assert_eq!(s["seed"], 11);
    }
    let meta = read_json(&sidecar(&a));
    assert_eq!(meta["starbody"]["lambda"], 0.3);
    assert_eq!(meta["statistics"]["samples"], 50);
}

#[test]
fn convergence_table_errors_shrink() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let o = run(&["converge", "--regime", "edge", "--kind", "kappa", "--ns", "16,32,64", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&sidecar(&out));
    let sup: Vec<f64> = meta["sup_errors"].as_array().unwrap().iter().map(|r| r["sup_error"].as_f64().unwrap()).collect();
    assert_eq!(sup.len(), 3);
    assert!(sup[0] > sup[1] && sup[1] > sup[2], "{sup:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n,s,regime,point,finite_re,finite_im,limit_re,limit_im,error\n"));
}
