use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qreg_cli::output::config_hash;
use qreg_cli::RunConfig;

fn qreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qreg")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.ini");
    fs::write(&p, text).unwrap();
    p
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn simulate_cat_starts_at_unit_fidelity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("cat-simulate.ini");
    let out = qreg(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = body(&tmp.path().join("simulate.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,F"));
    assert_eq!(lines.next(), Some("0.00000000000e0,1.00000000000e0"));
    assert_eq!(lines.count(), 40);
}

#[test]
fn outputs_carry_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = configs().join("cat-simulate.ini");
    let cfg = RunConfig::parse(&fs::read_to_string(&cfg_path).unwrap()).unwrap();
    let out = qreg(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--output",
        tmp.path().to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let hash_line = format!("# config_sha256={}", config_hash(&cfg));
    assert!(stdout.starts_with("# qreg "));
    assert!(stdout.contains(&hash_line));
    let file = fs::read_to_string(tmp.path().join("simulate.csv")).unwrap();
    assert!(file.contains(&hash_line));
    // the embedded configuration parses back to the same run
    let embedded: String = file
        .lines()
        .take_while(|l| l.starts_with('#'))
        .skip(4)
        .map(|l| l.trim_start_matches('#').trim_start().to_string() + "\n")
        .collect();
    assert_eq!(RunConfig::parse(&embedded).unwrap(), cfg);
}

#[test]
fn classify_reports_independent_regime() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("independent-classify.ini");
    let out = qreg(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l == "classification=Independent-1"), "{stdout}");
    let json: serde_json::Value = serde_json::from_str(&body(&tmp.path().join("classify.json"))).unwrap();
    assert_eq!(json["classification"], "Independent-1");
}

#[test]
fn encode_output_is_a_valid_state_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("modulated-encode.ini");
    let out = qreg(&[
        "encode",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let state =
        qreg_cli::commands::parse_state_file(&fs::read_to_string(tmp.path().join("encoded.state")).unwrap()).unwrap();
    assert_eq!(state.qubits(), 6);
    assert_eq!(state.support_len(), 4);
    assert!(state.labels().any(|l| l.to_string() == "-++-++"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("disorder-scan.ini");
    let run = |seed: &str, dir: &str| {
        let d = tmp.path().join(dir);
        let out = qreg(&[
            "disorder-scan",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            d.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(out.status.success());
        (
            String::from_utf8(out.stdout).unwrap(),
            body(&d.join("disorder_scan.csv")),
        )
    };
    let (a, body_a) = run("1", "a");
    let (b, body_b) = run("2", "b");
    assert!(a.contains("# seed=1") && b.contains("# seed=2"));
    assert_ne!(body_a, body_b);
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[geometry]\ndelta = -1\n");
    let out = qreg(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry.delta"));

    let cfg = write_config(tmp.path(), "[geometry]\nwidth = 3\n");
    let out = qreg(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key geometry.width"));

    let cfg = write_config(tmp.path(), "[run]\ncode = adjacent\n");
    let out = qreg(&[
        "pairing",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().join("p").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("p").join("pairing.txt").exists());
}

#[test]
fn missing_files_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qreg(&["simulate", "--config", tmp.path().join("absent.ini").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let cfg = write_config(tmp.path(), "[state]\npreset = file\nfile = nowhere.state\n");
    let out = qreg(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn tolerance_breach_exits_with_two_and_removes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    // a single integration step cannot reach the closed form
    let cfg = write_config(
        tmp.path(),
        "[run]\nsuite = quick\noracle_steps = 1\noracle_samples = 50\n",
    );
    let dir = tmp.path().join("o");
    let out = qreg(&[
        "validate-oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("passed=false"));
    assert!(!dir.join("validate_oracle.csv").exists());
}

#[test]
fn validate_oracle_quick_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("oracle-quick.ini");
    let out = qreg(&[
        "validate-oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = body(&tmp.path().join("validate_oracle.csv"));
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn quiet_suppresses_stdout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("modulated-encode.ini");
    let out = qreg(&[
        "pairing",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        tmp.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(body(&tmp.path().join("pairing.txt")).contains("m=3"));
}
