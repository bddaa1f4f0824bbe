use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hf"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("HF_SEED")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(name)).expect("report written");
    serde_json::from_str(&text).expect("valid JSON")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn transition_samples_and_junctions() {
    let tmp = TempDir::new().unwrap();
    let o = hf(tmp.path(), &["transition", "--a", "1", "--range", "-5:5", "--samples", "1000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("transition_samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,H,dH"));
    assert_eq!(lines.count(), 1000);
    let r = report(tmp.path(), "transition_report.json");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["junctions"]["exact"]["pass"], true);
    assert_eq!(r["junctions"]["float"]["pass"], true);
    assert_eq!(r["pass"], true);
    assert!(r["sup_bound"].is_null());
}

#[test]
fn transition_bound_report() {
    let tmp = TempDir::new().unwrap();
    let o = hf(tmp.path(), &["transition", "--a", "2", "--check-bound"]);
    assert_eq!(code(&o), 0);
    let r = report(tmp.path(), "transition_report.json");
    let max = r["sup_bound"]["grid"]["max_abs"].as_f64().unwrap();
    assert!((max - 125.0 / 216.0).abs() < 1e-10, "{max}");
    assert_eq!(r["sup_bound"]["bound"].as_f64(), Some(1.0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[PASS] transition/sup_bound"));
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["transition", "--a", "0"][..],
        &["transition", "--a", "-1/2"],
        &["transition"],
        &["transition", "--a", "1", "--range", "3:1"],
        &["geodesic", "--chart", "u", "--from", "0"],
        &["geodesic", "--chart", "x", "--from", "4"],
        &["transform", "--R", "0"],
        &["transform", "--R", "1", "--sin-theta", "2"],
        &["--M", "0", "transform", "--R", "1"],
        &["--format", "xml", "transition", "--a", "1"],
        &["frobnicate"],
    ] {
        let o = hf(tmp.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn transform_regimes() {
    let cases = [
        ("1", "Interior", "-2"),
        ("10", "Exterior", "0"),
        ("2", "Horizon", "-2"),
    ];
    for (r, regime, tr) in cases {
        let tmp = TempDir::new().unwrap();
        let o = hf(tmp.path(), &["transform", "--R", r, "--M", "1"]);
        assert_eq!(code(&o), 0, "R={r}: {}", String::from_utf8_lossy(&o.stdout));
        let rep = report(tmp.path(), "transform_report.json");
        assert_eq!(rep["regime"], regime);
        assert_eq!(rep["standardized"]["coefficients"]["tr"], tr);
        assert_eq!(rep["element"]["chart"], "U");
        if regime == "Horizon" {
            assert_eq!(rep["b_term"]["zero"], true);
            assert_eq!(rep["standardized"]["f_m"], "unlimited");
            assert_eq!(rep["standardized"]["f_m_dr"], "0");
        }
        if regime == "Exterior" {
            assert_eq!(rep["standardized"]["chart"], "t");
            assert_eq!(rep["standardized"]["coefficients"]["rr"], "-5/4");
        }
    }
}

#[test]
fn transform_with_units_and_angle() {
    let tmp = TempDir::new().unwrap();
    let o = hf(
        tmp.path(),
        &["--G", "2/3", "--M", "5", "--c", "7", "transform", "--R", "1/10", "--sin-theta", "3/5"],
    );
    assert_eq!(code(&o), 0);
    let rep = report(tmp.path(), "transform_report.json");
    assert_eq!(rep["regime"], "Interior");
    assert_eq!(rep["standardized"]["coefficients"]["tr"], "-14");
    assert_eq!(rep["standardized"]["coefficients"]["phph"], "-9/2500");
}

#[test]
fn geodesic_u_ray_crosses_and_t_ray_blows_up() {
    let tmp = TempDir::new().unwrap();
    let o = hf(tmp.path(), &["geodesic", "--chart", "u", "--dir", "in", "--from", "4"]);
    assert_eq!(code(&o), 0);
    let r = report(tmp.path(), "geodesic_report.json");
    assert_eq!(r["crossed_horizon"], true);
    assert_eq!(r["outcome"]["kind"], "reached");
    assert_eq!(r["delta_t"].as_f64(), Some(0.0));
    let csv = std::fs::read_to_string(tmp.path().join("geodesic_trajectory.csv")).unwrap();
    assert!(csv.starts_with("R,T,chart,direction,local_error_estimate\n4.0,0.0,U,ingoing,"));

    let o = hf(tmp.path(), &["geodesic", "--chart", "t", "--dir", "in", "--from", "4"]);
    assert_eq!(code(&o), 0);
    let r = report(tmp.path(), "geodesic_report.json");
    assert_eq!(r["outcome"]["kind"], "blow_up");
    assert_eq!(r["crossed_horizon"], false);
    assert!(r["end"]["r"].as_f64().unwrap() > 2.0);
    assert!(r["closed_form_max_relative_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn failed_check_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    // a loose tolerance cannot meet the 1e-6 closed-form check
    let o = hf(tmp.path(), &["geodesic", "--chart", "t", "--from", "4", "--rel-tol", "1e-3"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] geodesic/closed_form"));
    assert_eq!(report(tmp.path(), "geodesic_report.json")["pass"], false);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let runs: [&[&str]; 3] = [
        &["--seed", "11", "transition", "--a", "3/2", "--check-bound", "--bound-samples", "5000"],
        &["--seed", "11", "transform", "--R", "3/2"],
        &["geodesic", "--chart", "t", "--from", "6"],
    ];
    for args in runs {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(code(&hf(a.path(), args)), 0);
        assert_eq!(code(&hf(b.path(), args)), 0);
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let x = std::fs::read(a.path().join(&name)).unwrap();
            let y = std::fs::read(b.path().join(&name)).unwrap();
            assert!(x == y, "{args:?}: {name:?} differs");
        }
    }
}

#[test]
fn seed_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.conf");
    std::fs::write(&cfg, "seed = 5\nM = \"3/2\"\nformat = \"json\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hf"));
        cmd.arg("--out").arg(tmp.path()).arg("--config").arg(cfg).args(extra);
        cmd.args(["transform", "--R", "1"]).env_remove("HF_SEED");
        if let Some(v) = env {
            cmd.env("HF_SEED", v);
        }
        assert_eq!(code(&cmd.output().unwrap()), 0);
        report(tmp.path(), "transform_report.json")
    };

    let r = run(&[], None);
    assert_eq!((r["seed"].as_u64(), r["seed_source"].as_str()), (Some(5), Some("config")));
    assert_eq!(r["constants"]["M"], "3/2");
    // json format skips the coefficient CSV
    assert!(!tmp.path().join("transform_coefficients.csv").exists());
    let r = run(&["--seed", "8", "--M", "1"], None);
    assert_eq!((r["seed"].as_u64(), r["seed_source"].as_str()), (Some(8), Some("flag")));
    assert_eq!(r["constants"]["M"], "1");
    let r = run(&["--seed", "8"], Some("13"));
    assert_eq!((r["seed"].as_u64(), r["seed_source"].as_str()), (Some(13), Some("env")));
}

#[test]
fn json_format_writes_json_data() {
    let tmp = TempDir::new().unwrap();
    let o = hf(tmp.path(), &["--format", "json", "transition", "--a", "1", "--samples", "11"]);
    assert_eq!(code(&o), 0);
    let rows = report(tmp.path(), "transition_samples.json");
    assert_eq!(rows.as_array().unwrap().len(), 11);
    assert_eq!(rows[0]["x"].as_f64(), Some(-2.0));
    assert_eq!(rows[0]["H"].as_f64(), Some(-1.0 / 3.0));

    let o = hf(tmp.path(), &["--format", "json", "geodesic", "--chart", "u", "--dir", "out", "--from", "3"]);
    assert_eq!(code(&o), 0);
    let tr = report(tmp.path(), "geodesic_trajectory.json");
    assert_eq!(tr["chart"], "U");
    assert_eq!(tr["direction"], "outgoing");
}

#[test]
fn truncation_window_reaches_series_output() {
    let tmp = TempDir::new().unwrap();
    let a = "1*e^(1) + 1*e^(2)";
    let o = hf(tmp.path(), &["--window", "1", "transform", "--R", "2", "--a", a, "--monad-points", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(tmp.path(), "transform_report.json");
    assert_eq!(r["truncation"]["window"], "1");
    assert_eq!(r["f_m"], "-1*e^(-1) + 1*e^(0)");

    // b is built from f_M squared, so a one-unit window drops the terms the
    // cancellation needs at deeper monad points; the default window keeps them
    let o = hf(tmp.path(), &["--window", "1", "transform", "--R", "2", "--a", a]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] transform/b_term_monad"));
    let o = hf(tmp.path(), &["transform", "--R", "2", "--a", a]);
    assert_eq!(code(&o), 0);
}
