use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn thinfilm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfilm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut full = vec![
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    full.extend_from_slice(args);
    thinfilm(&full)
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn defaults() -> String {
    let out = thinfilm(&["--dump-defaults"]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn dumped_defaults_drive_the_kernel_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &defaults(), &["kernel"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(dir.path(), "kernel_report.json");
    assert!(r["mass_error"].as_f64().unwrap() < 1e-6);
    for f in ["kernel.json", "kernel.csv"] {
        assert!(dir.path().join("out").join(f).exists());
    }
}

#[test]
fn small_radius_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "[grid]\nradius = 4.0\n", &["kernel"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quadrature divergence"));
}

#[test]
fn config_errors_exit_with_three() {
    for (cfg, needle) in [
        ("dimension = 3\n", "dimension"),
        ("resid_tol = 0.0\n", "resid_tol"),
        ("[quad]\nxi_max = -1.0\n", "quad.xi_max"),
        ("[continue]\nkind = \"sideways\"\n", "continue.kind"),
        ("no_such_key = 1\n", "no_such_key"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_in(dir.path(), cfg, &["kernel"]);
        assert_eq!(out.status.code(), Some(3), "{cfg}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains(needle),
            "{cfg}"
        );
    }
    assert_eq!(thinfilm(&["--no-such-flag"]).status.code(), Some(3));
    assert_eq!(thinfilm(&[]).status.code(), Some(3));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run_in(d.path(), "kmax = 3\n", &["--threads", "1", "spectrum"]);
        assert!(out.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        let x = fs::read(a.path().join("out").join(&n)).unwrap();
        let y = fs::read(b.path().join("out").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?}");
    }
}

#[test]
fn spectrum_of_order_zero_is_a_single_unit_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "kmax = 0\n", &["--strict", "spectrum"]);
    assert!(out.status.success());
    let gram = fs::read_to_string(dir.path().join("out/gram.csv")).unwrap();
    let lines: Vec<&str> = gram.lines().collect();
    assert_eq!(lines.len(), 2);
    let entry: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((entry - 1.0).abs() < 1e-12);
}

#[test]
fn default_spectrum_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "", &["--strict", "spectrum"]);
    assert!(out.status.success());
    let r = report(dir.path(), "spectrum_report.json");
    assert!(r["gram_max_deviation"].as_f64().unwrap() < 1e-5);
    assert!(r["eigen_residual_max"].as_f64().unwrap() < 1e-4);
    assert_eq!(r["adjoint_identity_exact"], Value::Bool(true));
}

#[test]
fn planar_eigenspace_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "dimension = 2\nkmax = 3\n", &["spectrum"]);
    assert!(out.status.success());
    let r = report(dir.path(), "spectrum_report.json");
    assert_eq!(r["eigenspace_sizes"], serde_json::json!([1, 2, 3, 4]));
}

#[test]
fn blowup_branch_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "", &["branch", "--k", "0", "--kind", "blowup"]);
    assert!(out.status.success());
    let r = report(dir.path(), "branch.json");
    assert!(r["report"]["coefficient"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn global_continuation_approaches_the_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "",
        &[
            "--strict",
            "continue",
            "--kind",
            "global",
            "--k",
            "0",
            "--n-list",
            "0.2,0.1,0.05",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(dir.path(), "continue_report.json");
    let d: Vec<f64> = r["homotopy_distance"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(d.len(), 3);
    assert!(d[0] > d[1] && d[1] > d[2]);
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(dir.path().join("out/profile_global_k0_n0.05.csv").exists());
}

#[test]
fn moment_cancelled_data_decay_at_the_first_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "", &["--strict", "evolve", "--k", "1"]);
    assert!(out.status.success());
    let r = report(dir.path(), "evolve_report.json");
    assert!((r["fitted_rate"].as_f64().unwrap() + 0.25).abs() <= 0.05 * 0.25);
}

#[test]
fn expansion_diagnostic_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "", &["--strict", "diagnose"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/diagnose.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
