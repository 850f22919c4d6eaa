use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use random_gauge_cli::run;
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rgauge(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("rgauge").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn j0_quadrature(x: f64) -> f64 {
    let k = 2000;
    let h = PI / k as f64;
    let s: f64 = (0..k)
        .map(|i| (x * ((i as f64 + 0.5) * h).sin()).cos())
        .sum();
    s * h / PI
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cf_grid_has_21_rows_starting_at_one() {
    let o = rgauge(&[
        "cf",
        "--dist",
        "gaussian:sigma=1",
        "--kind",
        "sin",
        "--A",
        "1",
        "--omega",
        "0:10:0.5",
        "--count",
        "1e4",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.starts_with("omega,re,im,mc_re,mc_im,std_err\n"));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 21);
    assert_eq!(num(&rows[0][0]), 0.0);
    assert_eq!(num(&rows[0][1]), 1.0);
    assert_eq!(num(&rows[0][2]), 0.0);
    assert_eq!(num(&rows[20][0]), 10.0);
}

#[test]
fn cf_of_uniform_angle_is_j0() {
    let o = rgauge(&[
        "cf",
        "--dist",
        "uniform",
        "--A",
        "1.5",
        "--omega",
        "0:12:0.25",
        "--count",
        "1e4",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    for row in csv_rows(&o.stdout) {
        let (w, re) = (num(&row[0]), num(&row[1]));
        assert!(
            (re - j0_quadrature(1.5 * w)).abs() <= 1e-10,
            "omega {w}: {re}"
        );
    }
}

#[test]
fn unknown_distribution_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cf.csv");
    let o = rgauge(&[
        "cf",
        "--dist",
        "weibull:k=2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("`dist`"), "{}", o.stderr);
    assert!(!out.exists());
}

#[test]
fn bad_config_file_names_the_field_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": {"moments": {"max_mm": 3}}}"#).unwrap();
    let o = rgauge(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(o.code, 0);
    assert!(o.stderr.contains("max_mm"), "{}", o.stderr);
    assert!(!out.exists());

    std::fs::write(&cfg, r#"{"command": {"moments": {"max_m": 40}}}"#).unwrap();
    let o = rgauge(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("`max_m`"), "{}", o.stderr);
    assert!(!out.exists());
}

#[test]
fn pdf_rows_integrate_to_one() {
    let o = rgauge(&["pdf", "--dist", "uniform", "--A", "2"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.starts_with("y,pdf\n"));
    let rows: Vec<(f64, f64)> = csv_rows(&o.stdout)
        .iter()
        .map(|r| (num(&r[0]), num(&r[1])))
        .collect();
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    let total: f64 = rows
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    assert!((total - 1.0).abs() <= 1e-4, "{total}");
}

#[test]
fn pdf_is_zero_outside_the_support() {
    let o = rgauge(&[
        "pdf",
        "--dist",
        "cauchy:alpha=1",
        "--A",
        "1",
        "--y",
        "-3:3:0.25",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 25);
    for r in rows {
        let (y, f) = (num(&r[0]), num(&r[1]));
        if y.abs() > 1.0 {
            assert_eq!(f, 0.0, "y {y}");
        } else if y.abs() < 1.0 {
            assert!(f > 0.0, "y {y}");
        }
    }
}

#[test]
fn moments_reproduce_the_gaussian_corollary() {
    let o = rgauge(&["moments", "--dist", "gaussian:sigma=1", "--count", "1e5"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let q = (-2.0f64).exp();
    let printed = [0.0, (1.0 - q) / 2.0, 0.0, (3.0 - 4.0 * q + q.powi(4)) / 8.0];
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 4);
    for (r, want) in rows.iter().zip(printed) {
        assert!((num(&r[1]) - want).abs() <= 1e-12, "{r:?}");
        assert!((num(&r[2]) - want).abs() <= 1e-12, "{r:?}");
        assert!((num(&r[3]) - want).abs() <= 3.0 * num(&r[4]), "{r:?}");
    }
}

#[test]
fn ab_visibility_matches_cauchy_cf() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ab.csv");
    let o = rgauge(&[
        "ab",
        "--noise",
        "cauchy:alpha=1",
        "--coupling",
        "1",
        "--flux",
        "1",
        "--count",
        "1e6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let s = read_json(&dir.path().join("ab.summary.json"));
    let v = &s["visibility"];
    let (emp, se) = (
        v["empirical"].as_f64().unwrap(),
        v["std_error"].as_f64().unwrap(),
    );
    assert!((emp - (-1.0f64).exp()).abs() <= 3.0 * se, "{v}");
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 64);
}

#[test]
fn metric_deviation_is_at_rounding_level() {
    let o = rgauge(&["metric", "--r", "2", "--count", "1e5"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows[0][0], "max_deviation");
    assert!(num(&rows[0][1]) <= 1e-13);
}

#[test]
fn metric_phase_statistics() {
    let o = rgauge(&[
        "metric",
        "--count",
        "1e5",
        "--s",
        "2",
        "--noise",
        "gaussian:sigma=0.5",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    let get = |name: &str| num(&rows.iter().find(|r| r[0] == name).unwrap()[1]);
    assert!((get("phase_mean_re") - 2.0 * (-0.125f64).exp()).abs() <= 1e-15);
    assert!((get("phase_mc_mean_re") - get("phase_mean_re")).abs() < 0.01);
}

#[test]
fn huygens_constant_gain_gives_pi() {
    let o = rgauge(&["huygens", "--gain", "const:0.5", "--wavefront", "ones:256"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 256);
    for r in rows {
        assert!((num(&r[1]) - PI).abs() <= 1e-12);
        assert!(num(&r[2]).abs() <= 1e-12);
    }
}

#[test]
fn huygens_ensemble_and_csv_wavefront() {
    let dir = tempfile::tempdir().unwrap();
    let wf = dir.path().join("w.csv");
    std::fs::write(
        &wf,
        random_gauge::huygens::Wavefront::sine(64).unwrap().to_csv(),
    )
    .unwrap();
    let arg = format!("csv:{}", wf.display());
    let o = rgauge(&[
        "huygens",
        "--gain",
        "poly:offset=0.1,a11=0.5",
        "--wavefront",
        &arg,
        "--coef-std",
        "0.05",
        "--draws",
        "200",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o
        .stdout
        .starts_with("theta,mean_intensity,variance,std_error\n"));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| num(&r[2]) >= 0.0));
}

#[test]
fn phasor_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.json");
    let o = rgauge(&[
        "phasor",
        "--term",
        "det:1@uniform",
        "--term",
        "gaussian:mean=0,std=1@uniform",
        "--count",
        "1e5",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["mean", "variance_paper", "variance_exact"]);
    let s = read_json(&summary);
    assert_eq!(s["variance_exact"]["re"].as_f64().unwrap(), 1.0);
}

#[test]
fn json_format_is_an_array_of_rows() {
    let o = rgauge(&[
        "--format", "json", "moments", "--count", "1e4", "--max-m", "2",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["m"].as_f64(), Some(2.0));
    assert!((rows[1]["bessel"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = rgauge(&[
        "--seed",
        "99",
        "cf",
        "--dist",
        "laplace:alpha=2",
        "--omega",
        "0:3:1",
        "--count",
        "5000",
    ]);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let echo = first.stderr.lines().next().unwrap();
    let cfg: Value = serde_json::from_str(echo).unwrap();
    assert_eq!(cfg["seed"], 99);
    let path = dir.path().join("echo.json");
    std::fs::write(&path, echo).unwrap();
    let again = rgauge(&["--config", path.to_str().unwrap()]);
    assert_eq!(again.code, 0, "{}", again.stderr);
    assert_eq!(again.stdout, first.stdout);
    assert_eq!(again.stderr.lines().next(), Some(echo));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"command": {"cf": {"omega": "1"}}}"#).unwrap();
    let o = rgauge(&[
        "--config",
        path.to_str().unwrap(),
        "cf",
        "--omega",
        "0:5:1",
        "--count",
        "2000",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(num(&rows[0][0]), 1.0);
    assert!(o.stderr.contains(r#""count":2000"#), "{}", o.stderr);
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    let args = [
        "cf",
        "--dist",
        "triangular:a=1",
        "--omega",
        "0:4:0.5",
        "--count",
        "300000",
    ];
    let a = rgauge(&[&["--threads", "1"][..], &args].concat());
    let b = rgauge(&[&["--threads", "3"][..], &args].concat());
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_only_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let o = rgauge(&[
        "validate",
        "--only",
        "gaussian",
        "--count",
        "1e6",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[0] == "gaussian" && r[6] == "AGREE"));
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn tampered_golden_list_fails() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden.csv");
    let text = random_gauge::oracle::DEFAULT_GOLDEN.replace(
        "sin.gaussian-zero-mean.m2,AGREE",
        "sin.gaussian-zero-mean.m2,DISAGREE",
    );
    std::fs::write(&golden, text).unwrap();
    let o = rgauge(&[
        "validate",
        "--only",
        "gaussian",
        "--count",
        "1e6",
        "--golden",
        golden.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.code, 1);
    assert!(
        o.stderr.contains("sin.gaussian-zero-mean.m2"),
        "{}",
        o.stderr
    );
}

#[test]
fn unknown_report_block_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rgauge(&[
        "validate",
        "--only",
        "gausian",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("`only`"), "{}", o.stderr);
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn seed_comes_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_rgauge");
    let run_with = |seed: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(bin);
        c.env_remove("RGAUGE_SEED");
        if let Some(s) = seed {
            c.env("RGAUGE_SEED", s);
        }
        let out = c
            .args(["cf", "--omega", "1", "--count", "2000"])
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success());
        (
            String::from_utf8(out.stdout).unwrap(),
            String::from_utf8(out.stderr).unwrap(),
        )
    };
    let (default_out, default_err) = run_with(None, &[]);
    assert!(default_err.contains(r#""seed":271828"#));
    let (env_out, env_err) = run_with(Some("5"), &[]);
    assert!(env_err.contains(r#""seed":5"#));
    assert_ne!(env_out, default_out);
    let (flag_out, _) = run_with(Some("7"), &["--seed", "5"]);
    assert_eq!(flag_out, env_out);
}

#[test]
fn missing_command_is_reported() {
    let o = rgauge(&[]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("no command"), "{}", o.stderr);
}
