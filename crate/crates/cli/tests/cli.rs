use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qca_anomaly_cli::error::{EXIT_OK, EXIT_PIPELINE, EXIT_VALIDATION};

const BIN: &str = env!("CARGO_BIN_EXE_qca-anomaly");

const LEVIN_GU: &str = "mode = \"anomaly\"\n\n[action]\npreset = \"levin-gu-z2\"\n";

fn run_config(dir: &Path, text: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, text).unwrap();
    Command::new(BIN).arg("run").arg(&cfg).args(["--out", dir.to_str().unwrap()]).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn levin_gu_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), LEVIN_GU, &[]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let summary = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(summary, stdout(&out));
    assert!(summary
        .lines()
        .any(|l| l == "verdict: Anomalous — no G-invariant gapped ground state possible (Theorem 4.4)"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["verdict"], "Anomalous");
    assert_eq!(json["class"], serde_json::json!([1]));
    assert_eq!(json["invariant_factors"], serde_json::json!([2]));
    let omega = json["omega"].as_array().unwrap();
    let last = omega.iter().find(|w| w["args"] == serde_json::json!([1, 1, 1])).unwrap();
    assert_eq!(last["phase"], "1/2");
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let configs = [
        LEVIN_GU.to_string(),
        "mode = \"spectra\"\n[spectra]\ngrid = [{ n = 8, terms = [\"h0\", \"h1\"] }, { n = 8, j = 4.0, terms = [\"h0\", \"h1\", \"hj\"] }]\n[limits]\nthreads = 2\n".to_string(),
    ];
    for text in configs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(run_config(a.path(), &text, &[]).status.code(), Some(EXIT_OK));
        assert_eq!(run_config(b.path(), &text, &["--threads", "1"]).status.code(), Some(EXIT_OK));
        for name in ["report.json", "report.txt", "report.csv"] {
            let (x, y) = (a.path().join(name), b.path().join(name));
            assert_eq!(x.exists(), y.exists());
            if x.exists() {
                assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{name}");
            }
        }
    }
}

#[test]
fn missing_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere");
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, LEVIN_GU).unwrap();
    let out = Command::new(BIN).arg("run").arg(&cfg).arg("--out").arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PIPELINE));
    assert!(String::from_utf8_lossy(&out.stderr).contains(missing.to_str().unwrap()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let parse = run_config(dir.path(), "mode = ", &[]);
    assert_eq!(parse.status.code(), Some(EXIT_VALIDATION));
    let invalid = run_config(dir.path(), "mode = \"cohomology\"\n", &[]);
    assert_eq!(invalid.status.code(), Some(EXIT_VALIDATION));
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("group"));
    let bad_flag = run_config(dir.path(), LEVIN_GU, &["--threads", "0"]);
    assert_eq!(bad_flag.status.code(), Some(EXIT_VALIDATION));
    // ω(1,1,1) = 1/2 cannot be snapped with denominators up to 1
    let snap = run_config(dir.path(), LEVIN_GU, &["--den-cap", "1"]);
    assert_eq!(snap.status.code(), Some(EXIT_PIPELINE));
    let unreadable = Command::new(BIN).args(["run", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(unreadable.status.code(), Some(EXIT_PIPELINE));
}

#[test]
fn cohomology_mode() {
    let dir = tempfile::tempdir().unwrap();
    let text = "mode = \"cohomology\"\n[group]\nkind = \"cyclic\"\norder = 2\n[cohomology]\ndegree = 3\n";
    let out = run_config(dir.path(), text, &[]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(stdout(&out).lines().any(|l| l == "H³ = ℤ/2"));
}

#[test]
fn spectra_failures_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let text = "mode = \"spectra\"\n[spectra]\ngrid = [{ n = 6, terms = [\"h0\"] }, { n = 24, terms = [\"h0\"] }]\n";
    let out = run_config(dir.path(), text, &[]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,J,a,E0,E1,E2,gap,gap2,charge_re,charge_im");
    assert!(lines[1].starts_with("6,0,0,-6,-4,-4,2,2,"));
    assert_eq!(lines[2], "24,0,0,nan,nan,nan,nan,nan,nan,nan");
}

#[test]
fn gnvw_mode_reports_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
mode = "gnvw"

[group]
kind = "cyclic"
order = 1

[action]
preset = "lsm"
matrices = [[[1, 0], [0, 0], [0, 0], [1, 0]]]
"#;
    let out = run_config(dir.path(), text, &[]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let translation = json["elements"].as_array().unwrap().iter().find(|e| e["element"] == "translation").unwrap();
    assert_eq!(translation["symbolic"], serde_json::json!({"2": 1}));
    assert_eq!(translation["dim_right"], 4);
    assert_eq!(translation["dim_left"], 1);
}

#[test]
fn selftest_passes() {
    let out = Command::new(BIN).arg("selftest").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(stdout(&out).ends_with("selftest: passed\n"));
}
