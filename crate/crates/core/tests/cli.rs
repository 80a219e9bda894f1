use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use coupling_scatter::cli::{run, JOBS_ENV};
use coupling_scatter::config::load_config;
use coupling_scatter::Complex64;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("coupling-scatter").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn examples(dir: &Path) {
    let (code, _, err) = invoke(&["examples", "--dir", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Rows of a CSV table as field vectors, header first.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn bundled_configs_are_byte_stable_and_round_trip() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    examples(a.path());
    examples(b.path());
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in &names {
        assert_eq!(std::fs::read(a.path().join(n)).unwrap(), std::fs::read(b.path().join(n)).unwrap());
        let cfg = load_config(&a.path().join(n)).unwrap();
        let (code, out, err) =
            invoke(&["scan", "--config", a.path().join(n).to_str().unwrap(), "--lambda", "1.5,-0.5"]);
        assert_eq!(code, 0, "{n:?}: {err}");
        assert_eq!(csv_rows(&out).len(), 2);
        assert!(!cfg.problem.perturbation().is_zero());
    }
    let ex1 = load_config(&a.path().join("example1.json")).unwrap();
    let spikes: Vec<(f64, f64)> = ex1.problem.perturbation().spikes().iter().map(|s| (s.position, s.weight)).collect();
    assert_eq!(spikes, vec![(0.0, 1.0), (1.0, -1.0)]);
    assert_eq!(coupling_scatter::corpus::example1(1.0), ex1.problem);
    let ex2 = load_config(&a.path().join("example2.json")).unwrap();
    assert_eq!(ex2.problem.background().segments()[0].coeffs, vec![-PI * PI]);
    assert_eq!(ex2.problem.perturbation().segments()[0].coeffs, vec![-1.0]);
}

#[test]
fn scan_reproduces_example_one() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let (code, out, _) =
        invoke(&["scan", "--config", &path(dir.path(), "example1.json"), "--lambda", "0", "--lambda", "2"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["lambda_re", "lambda_im", "a_re", "a_im", "b_re", "b_im", "err_abs", "method"]);
    assert_eq!((num(&rows[1][2]), num(&rows[1][4]), num(&rows[1][5])), (1.0, 0.0, 0.0));
    let i = Complex64::new(0.0, 1.0);
    let want = 2.0 * (1.0 - i) * ((2.0 * i).exp() - 1.0);
    let got = Complex64::new(num(&rows[2][4]), num(&rows[2][5]));
    assert!((got - want).norm() <= 1e-8 * want.norm());
    assert_eq!(rows[2][7], "ode");

    let lam = format!("{}", 3.0 * PI * PI);
    let (_, out, _) = invoke(&["scan", "--config", &path(dir.path(), "example2.json"), "--lambda", &lam]);
    let row = &csv_rows(&out)[1];
    assert!(num(&row[4]).hypot(num(&row[5])) <= 1e-8);
}

#[test]
fn analyses_on_example_two() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let cfg = path(dir.path(), "example2.json");
    let (code, out, _) = invoke(&["count", "--config", &cfg, "--radius", "500"]);
    assert_eq!(code, 0);
    assert_eq!(csv_rows(&out)[1][1], "7");

    let lam = format!("{}", 5.0 * PI * PI);
    let (code, out, _) = invoke(&["eigencount", "--config", &cfg, "--lambda", &lam]);
    assert_eq!(code, 0);
    assert_eq!(csv_rows(&out)[1][1], "2");

    let (code, out, _) = invoke(&["zeros", "--config", &cfg, "--grid", "-20:40:121"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    assert!((num(&rows[2][0]) - 3.0 * PI * PI).abs() < 1e-8 || (num(&rows[1][0]) - 3.0 * PI * PI).abs() < 1e-8);

    let (code, out, _) = invoke(&["series", "--config", &cfg, "--lambda", "3,4"]);
    assert_eq!(code, 0);
    assert_eq!(csv_rows(&out)[1][8], "true");
}

#[test]
fn witness_and_reflection_tables() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let (code, out, _) = invoke(&["witness", "--config", &path(dir.path(), "free_chi.json"), "--lambda", "-1e4"]);
    assert_eq!(code, 0);
    assert_eq!(csv_rows(&out).len(), 6);
    let (code, out, _) = invoke(&["reflect", "--config", &path(dir.path(), "traveling_barrier.json")]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 22);
    assert!(rows[1..].iter().all(|r| num(&r[6]).abs() < 1e-10));
    // a real reference has no traveling basis
    let (code, _, err) = invoke(&["reflect", "--config", &path(dir.path(), "free_chi.json"), "--lambda", "1"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error kind=no_traveling_basis"), "{err}");
}

#[test]
fn runs_are_deterministic_and_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let cfg = path(dir.path(), "noise.json");
    let (_, first, _) = invoke(&["scan", "--config", &cfg, "--jobs", "1"]);
    let (_, second, _) = invoke(&["scan", "--config", &cfg, "--jobs", "4"]);
    assert_eq!(first, second);
    let (_, json, _) = invoke(&["scan", "--config", &cfg, "--format", "json"]);
    let rows = csv_rows(&first);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len() + 1, rows.len());
    // same 17-digit text in both encodings
    for (row, obj) in rows[1..].iter().zip(arr) {
        for (k, v) in rows[0].iter().zip(row) {
            if k == "method" {
                assert_eq!(obj[k].as_str().unwrap(), v);
            } else {
                assert!(json.contains(&format!("\"{k}\": {v}")), "{k} = {v}");
                assert_eq!(obj[k].as_f64().unwrap(), num(v));
            }
        }
    }
}

#[test]
fn output_flag_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    examples(dir.path());
    let target = dir.path().join("out.csv");
    let (code, out, _) =
        invoke(&["series", "--config", &path(dir.path(), "noise.json"), "--output", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(target).unwrap();
    assert_eq!(csv_rows(&text).len(), 82);
}

#[test]
fn errors_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.json");
    std::fs::write(
        &zero,
        r#"{"problem": {"Q": {"segments": [{"interval": [0, 1], "coeffs": [-1]}]},
  "V": {"segments": [{"interval": [0, 1], "coeffs": [0]}]},
  "u0": {"value": [1, 0], "derivative": [0, 0]}}}"#,
    )
    .unwrap();
    let (code, _, err) = invoke(&["zeros", "--config", zero.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("b identically zero"));
    assert_eq!(err.lines().count(), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\"problem\": {\"Q\": {\"segments\": [{\"interval\": [0, 1], \"coeffs\": [0]}]},\n \"V\": 3}}",
    )
    .unwrap();
    let (code, _, err) = invoke(&["scan", "--config", bad.to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("problem.V") && err.contains("line 2"), "{err}");

    let (code, _, err) = invoke(&["count", "--config", zero.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("radii"));
    let (code, _, _) = invoke(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn binary_honours_exit_codes_and_job_env() {
    let exe = env!("CARGO_BIN_EXE_coupling-scatter");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe).args(["examples", "--dir", dir.path().to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let out = Command::new(exe)
        .env(JOBS_ENV, "2")
        .args(["scan", "--config", &path(dir.path(), "example1.json"), "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    let out = Command::new(exe)
        .env(JOBS_ENV, "0")
        .args(["scan", "--config", &path(dir.path(), "example1.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
