//! End-to-end checks of the gaflab binary: artifact layout, config handling,
//! and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gaflab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gaflab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(bin())
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("spawn gaflab")
}

#[test]
fn kernel_info_prints_closed_forms() {
    let dir = scratch("kernel-info");
    let out = run(&dir, &["kernel-info", "--family", "gef", "--r", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("a(r)"), "{text}");
    // a(2) = b(2) = 2 for the flat kernel; intensity 1/pi.
    assert!(text.contains("2.000000000000e0"), "{text}");
    assert!(text.contains("3.183098861838e-1"), "{text}");
    let json = std::fs::read_to_string(dir.join("kernel_info.json")).unwrap();
    assert!(json.contains("\"version\""));
    assert!(json.contains("\"family\": \"gef\""));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sample_zeros_writes_csv_schema() {
    let dir = scratch("sample-zeros");
    let out = run(
        &dir,
        &["sample-zeros", "--family", "gef", "--radius", "2", "--seed", "5", "--trials", "3"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("zeros.csv")).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "sample_seed,re,im,residual");
    assert!(csv.lines().any(|l| l.starts_with("# version=")));
    assert!(std::fs::metadata(dir.join("zeros_summary.json")).is_ok());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = scratch("config-merge");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "family=gef\nr=4\n").unwrap();
    // Flag overrides the file value of r.
    let out = Command::new(bin())
        .arg("--output-dir")
        .arg(&dir)
        .arg("--config")
        .arg(&cfg)
        .args(["kernel-info", "--r", "9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("at r = 9"), "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = scratch("bad-key");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "family=gef\nbogus=1\n").unwrap();
    let out = Command::new(bin())
        .arg("--output-dir")
        .arg(&dir)
        .arg("--config")
        .arg(&cfg)
        .args(["kernel-info", "--r", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_required_parameter_exits_two() {
    let dir = scratch("missing");
    let out = run(&dir, &["variance", "--family", "gef", "--k", "0", "--l", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn numerical_failure_exits_three_and_names_operation() {
    let dir = scratch("numfail");
    // The fully-rigid stress configuration: truncation cap fires instantly.
    let out = run(
        &dir,
        &[
            "rigidity", "--family", "double-exp", "--d-radius", "1", "--k-max", "3", "--eta",
            "0.125", "--trials", "5", "--seed", "7",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("truncation"), "stderr: {err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn variance_multi_l_writes_rows_and_plot() {
    let dir = scratch("variance-multi");
    let out = run(
        &dir,
        &[
            "variance", "--family", "gef", "--k", "0", "--eta", "1", "--l", "1,2", "--trials",
            "120", "--seed", "2", "--plot",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("variance.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect();
    assert_eq!(rows.len(), 3, "{csv}"); // header + 2 configs
    let svg = std::fs::read_to_string(dir.join("var_vs_l.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(std::fs::metadata(dir.join("variance_report.json")).is_ok());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn rigidity_emits_trials_csv_and_overlays() {
    let dir = scratch("rigidity-artifacts");
    let out = run(
        &dir,
        &[
            "rigidity", "--family", "double-exp", "--d-radius", "1", "--k-max", "4", "--eta",
            "4", "--trials", "12", "--seed", "9",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["recovery_report.json", "rigidity_trials.csv", "rigidity_power_sums.csv"] {
        assert!(std::fs::metadata(dir.join(f)).is_ok(), "missing {f}");
    }
    let overlays = std::fs::read_dir(&dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("rigidity_overlay_")
        })
        .count();
    assert!(overlays >= 10, "only {overlays} overlays");
    let json = std::fs::read_to_string(dir.join("recovery_report.json")).unwrap();
    assert!(json.contains("\"count_success_rate\""));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn admissibility_emits_report_and_csv() {
    let dir = scratch("admissibility");
    let out = run(&dir, &["admissibility", "--family", "double-exp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("admissibility.csv")).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "r,delta_hat,major_arc_err,minor_arc_ratio,minor_arc_ratio_quartic"
    );
    let json = std::fs::read_to_string(dir.join("admissibility_report.json")).unwrap();
    assert!(json.contains("\"b_divergent\": true"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn custom_family_from_file() {
    let dir = scratch("custom");
    let table = dir.join("coeffs.txt");
    // log a_n^2 = -2 lgamma(n+1), 200 entries.
    let mut text = String::new();
    for n in 0..200 {
        text.push_str(&format!("{:.17e}\n", -2.0 * libm::lgamma(n as f64 + 1.0)));
    }
    std::fs::write(&table, text).unwrap();
    let family = format!("custom:{}", table.display());
    let out = run(&dir, &["kernel-info", "--family", &family, "--r", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_dir_all(&dir);
}
