use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn ptsusy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptsusy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV report: comment lines and the header dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn spectrum_matches_closed_energies() {
    let out = ptsusy(&["spectrum", "--nu", "0", "--beta", "0", "--m-max", "1", "--n-max", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# gauge hbar=1 L=1 2M=1 eps0=9.869604401089358"));
    assert_eq!(text.lines().nth(1), Some("m,n,energy"));
    let r = rows(&text);
    let e0 = PI * PI;
    for (n, row) in r.iter().take(4).enumerate() {
        let want = ((n + 1) * (n + 1)) as f64 * e0;
        assert!((f(&row[2]) - want).abs() < 1e-12 * want);
    }
    // the m = 1 column is the m = 0 column shifted by one level
    for n in 0..3 {
        assert_eq!(r[4 + n][2], r[n + 1][2]);
    }

    let out = ptsusy(&["spectrum", "--nu", "1", "--beta", "2", "--m-max", "0", "--n-max", "0"]);
    let r = rows(&stdout(&out));
    assert!((f(&r[0][2]) - 3.0 * e0).abs() < 1e-12);
}

#[test]
fn spectrum_gap_columns_on_request() {
    let out = ptsusy(&[
        "spectrum", "--gaps", "--nu", "0", "--beta", "0", "--m-max", "0", "--n-max", "0",
    ]);
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1), Some("m,n,energy,gap_m,gap_n"));
    let r = rows(&text);
    assert!((f(&r[0][3]) - 3f64.sqrt()).abs() < 1e-14);
}

#[test]
fn wavefn_samples_ground_state_and_norm() {
    let out = ptsusy(&["wavefn", "--nu", "0", "--beta", "0", "--grid", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\nx,re,im,abs2\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 12);
    for row in &r[..11] {
        let x = f(&row[0]);
        let want = 2f64.sqrt() * (PI * x).sin();
        assert!((f(&row[1]) - want).abs() < 1e-14, "x={x}");
    }
    assert_eq!(&r[0][1..], ["0", "0", "0"]);
    assert_eq!(&r[10][1..], ["0", "0", "0"]);
    assert_eq!(r[11][0], "norm");
    assert!((f(&r[11][3]) - 1.0).abs() < 1e-8);
}

#[test]
fn wavefn_excited_hierarchy_state_is_normalized() {
    let out = ptsusy(&[
        "wavefn", "--nu", "2.5", "--beta", "3", "--m", "2", "--n", "4", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["samples"].as_array().unwrap().len(), 101);
}

#[test]
fn verify_passes_by_default_and_validates_against_schema() {
    let out = ptsusy(&["verify", "--n-max", "3", "--m-max", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let schema: serde_json::Value = serde_json::from_str(include_str!("../schema/verify-report.schema.json")).unwrap();
    let validator = jsonschema::JSONSchema::compile(&schema).unwrap();
    if let Err(errors) = validator.validate(&report) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("schema violations: {msgs:?}");
    }
    assert_eq!(report["passed"], true);
    let entries = report["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["mandatory"] == false));
}

#[test]
fn negative_control_fails_with_status_one() {
    let out = ptsusy(&[
        "verify",
        "--negative-control",
        "--n-max",
        "2",
        "--m-max",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let failed: Vec<&str> = rows(&text)
        .iter()
        .filter(|r| r[6] == "true" && r[7] == "false")
        .map(|r| {
            if r[0] == "factorization" {
                "factorization"
            } else {
                "other"
            }
        })
        .collect();
    assert!(failed.contains(&"factorization"));
}

#[test]
fn threshold_override_can_fail_a_run() {
    let out = ptsusy(&[
        "verify",
        "--n-max",
        "1",
        "--m-max",
        "0",
        "--tol",
        "factorization=1e-300",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = ptsusy(&["verify", "--n-max", "1", "--m-max", "0", "--tol", "no_such_identity=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tol.no_such_identity"));
}

#[test]
fn coherent_tables_agree_with_quadrature() {
    let out = ptsusy(&["coherent", "--nu", "1", "--beta", "2", "--m", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\nq,p,q2,p2,re,im,abs,quad_re,quad_im\n"));
    for r in rows(&text) {
        let (re, im, qre, qim) = (f(&r[4]), f(&r[5]), f(&r[7]), f(&r[8]));
        assert!(((re - qre).powi(2) + (im - qim).powi(2)).sqrt() < 1e-8);
        assert!(f(&r[6]) <= 1.0 + 1e-10);
        if r[0] == r[2] && r[1] == r[3] {
            assert!((f(&r[6]) - 1.0).abs() < 1e-12);
        }
    }

    let out = ptsusy(&["coherent", "--table", "resolution", "--m", "1"]);
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 41);
    assert!(r.iter().all(|row| (f(&row[1]) - 1.0).abs() < 1e-6));
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let path = scratch("coherent.json");
    let p = path.to_str().unwrap();
    let a = ptsusy(&["coherent", "--format", "json", "--out", p]);
    assert!(a.status.success());
    assert!(a.stdout.is_empty());
    let first = std::fs::read(&path).unwrap();
    let b = ptsusy(&["coherent", "--format", "json"]);
    assert_eq!(first, b.stdout);
    assert!(!first.contains(&b'\r'));
}

#[test]
fn config_file_with_flag_override() {
    let path = scratch("run.cfg");
    std::fs::write(&path, "# run\nnu = 0\nbeta = 0\nn_max = 1\nm_max = 0\n").unwrap();
    let cfg = path.to_str().unwrap();
    let r = rows(&stdout(&ptsusy(&["spectrum", "--config", cfg])));
    assert_eq!(r.len(), 2);
    assert!((f(&r[0][2]) - PI * PI).abs() < 1e-12);
    let r = rows(&stdout(&ptsusy(&["spectrum", "--config", cfg, "--nu", "1"])));
    assert!((f(&r[0][2]) - 4.0 * PI * PI).abs() < 1e-12);
}

#[test]
fn config_errors_report_line_and_field() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, "nu = 1\n\nbeta = lots\n").unwrap();
    let out = ptsusy(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:3: field `beta`"), "{err}");

    let out = ptsusy(&["spectrum", "--mass", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass"));
}
