use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pmean(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmean"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn weibull_curve_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["curve", "--dist", "weibull(k=3,lambda=1)", "--p", "1:8:0.5", "--out", "w3.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("w3.csv")).unwrap();
    assert!(csv.starts_with("p,nu,dnu_sign,dnu_dp,residual\n"));
    assert_eq!(csv.lines().count(), 16);
    let p: Vec<f64> = column(&csv, "p").iter().map(|v| v.parse().unwrap()).collect();
    let nu: Vec<f64> = column(&csv, "nu").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(p[0], 1.0);
    assert!((nu[0] - 2f64.ln().powf(1.0 / 3.0)).abs() < 1e-8);
    assert!((nu[0] - 0.88500).abs() < 1e-5);
    // 17 significant digits
    assert_eq!(column(&csv, "nu")[0], format!("{:.16e}", nu[0]));
    assert!(dir.path().join("w3.csv.manifest.json").is_file());
}

#[test]
fn symmetric_curve_is_flat_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["curve", "--dist", "skew_normal(alpha=0)", "--p", "1:5:1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let nu = column(&stdout(&o), "nu");
    assert_eq!(nu.len(), 5);
    assert!(nu.iter().all(|v| v.parse::<f64>().unwrap().abs() < 1e-8));
}

#[test]
fn levy_grid_is_clipped_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["curve", "--dist", "levy(mu=0,lambda=1)", "--p", "1:3:0.25"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
    let p: Vec<f64> = column(&stdout(&o), "p").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(p, vec![1.0, 1.25]);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["curve", "--dist", "nonsense(k=1)"],
        vec!["curve", "--dist", "weibull(k=2)", "--p", "1:x:1"],
        vec!["curve"],
        vec!["counterexample", "--lambda", "0.4"],
        vec!["verdict", "--dist", "weibull(k=2)", "--format", "csv"],
        vec!["mvsn", "--lambda", "1,1", "--sigma", "1,2;2,1"],
        vec!["frobnicate"],
    ] {
        let o = pmean(&args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["mvsn", "--lambda", "1,1", "--n", "100", "--p", "1,2", "--tol", "1e-300"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |d: &str| {
        let o = pmean(&["verdict", "--dist", d], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        serde_json::from_str::<Value>(&stdout(&o)).unwrap()
    };
    assert_eq!(run("weibull(k=2)")["conclusion"], "truly_positive");
    let v = run("weibull(k=4)");
    assert_eq!(v["conclusion"], "not_truly_positive");
    let w = &v["witness"];
    assert_eq!(w["kind"], "median_below_mode");
    assert!(w["nu1"].as_f64().unwrap() < w["nu0"].as_f64().unwrap());
    let v = run("log_logistic(beta=1.5)");
    assert_eq!(v["conclusion"], "truly_positive");
    let numbers = &v["evidence"][0]["numbers"];
    assert!(numbers.get("theta").is_some() && numbers.get("nu1").is_some(), "{v}");
}

#[test]
fn counterexample_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["counterexample", "--lambda", "0.6", "--out", "ce.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json_file(&dir.path().join("ce.json"));
    assert!((r["median"].as_f64().unwrap() - 1.786).abs() < 0.002);
    assert!((r["sign_difference"].as_f64().unwrap() + 6.99e-4).abs() < 5e-5);
    assert_eq!(r["sum"]["conclusion"], "not_truly_positive");
    let o = pmean(&["counterexample", "--lambda", "0.51"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(serde_json::from_str::<Value>(&stdout(&o)).is_ok());
}

#[test]
fn mvsn_run_is_colinear_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["mvsn", "--lambda", "5,5", "--n", "100000", "--seed", "1", "--p", "1:4:0.5", "--out", out];
    let o = pmean(&args("a"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = json_file(&dir.path().join("a/manifest.json"));
    assert!(m["results"]["colinearity_with_lambda"].as_f64().unwrap() >= 0.99, "{m}");
    assert_eq!(m["config"]["seed"], 1);
    let density = std::fs::read_to_string(dir.path().join("a/density.csv")).unwrap();
    assert!(density.starts_with("x,y,density\n"));
    assert_eq!(density.lines().count(), 101 * 101 + 1);

    pmean(&args("b"), dir.path());
    for f in ["trajectory.csv", "density.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn mvsn_symmetric_run_omits_tangents() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["mvsn", "--lambda", "0,0", "--n", "20000", "--out", "z"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = json_file(&dir.path().join("z/manifest.json"));
    let notes = m["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().starts_with("symmetric")));
    let csv = std::fs::read_to_string(dir.path().join("z/trajectory.csv")).unwrap();
    assert!(column(&csv, "reliable").iter().all(|r| r == "false"));
    assert!(column(&csv, "tau_1").iter().all(String::is_empty));
}

#[test]
fn manifests_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = pmean(&["curve", "--dist", "gamma(shape=2)", "--p", "1:4:1", "--out", "g.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(dir.path().join("g.csv")).unwrap();
    std::fs::remove_file(dir.path().join("g.csv")).unwrap();
    let o = pmean(&["curve", "--config", "g.csv.manifest.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(dir.path().join("g.csv")).unwrap(), first);

    let o = pmean(&["verdict", "--config", "g.csv.manifest.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"distribution": "exponential(rate=1)", "p_grid": [1, 2, 3], "output": {"format": "json"}}"#,
    )
    .unwrap();
    let o = pmean(&["curve", "--dist", "weibull(k=2)", "--config", "run.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let curve: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(curve["distribution"].as_str().unwrap().starts_with("exponential"));
    let nu2 = curve["points"][1]["nu"].as_f64().unwrap();
    assert!((nu2 - 1.0).abs() < 1e-9);
}

#[test]
fn piecewise_json_distribution() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("steps.json"),
        r#"[{"interval": [0, 1], "coefficients": ["3/5"]}, {"interval": [1, 2], "coefficients": ["2/5"]}]"#,
    )
    .unwrap();
    let o = pmean(&["verdict", "--dist", "steps.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["conclusion"], "truly_positive");
}
