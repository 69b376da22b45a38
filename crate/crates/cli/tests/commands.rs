use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TINY: &str = r#"
[model]
kind = "gp"
dim = 2

[coefficients]
potential = { builtin = "cosprod" }
sigma = { builtin = "cosprod", amplitude = 1.0, offset = -2.0 }

[carrier]
k0 = [0.4, 0.0]
band = 4
sector = { weights = [1, 1], modulus = 2, residue = 1 }

[bands]
truncation = 6
path = "GXM"
nmax = 4
per_segment = 5

[discretization]
cell_points = 8
dt = 0.05
record_every = 4

[study]
eps = [0.5, 0.45, 0.4]
box_policy = "scaled"
box_factor = 2.0
t_end = 1.0
"#;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bloch-envelope"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    std::fs::write(&path, TINY).unwrap();
    path
}

#[test]
fn bands_writes_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bands"], &tiny_config(dir.path()), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    // two segments of 5 points plus the closing corner
    assert_eq!(csv.lines().count(), 1 + 11);
    assert!(std::fs::read_to_string(dir.path().join("bands.svg")).unwrap().contains("</svg>"));
}

#[test]
fn coeffs_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["coeffs"], &config("gp_cosprod.toml"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coeffs.json")).unwrap()).unwrap();
    assert!((json["nu"].as_f64().unwrap() - 0.04905).abs() < 5e-4);
    assert!((json["omega0"].as_f64().unwrap() - 2.075).abs() < 5e-3);
    assert_eq!(json["band"].as_u64(), Some(4));
    assert!(std::fs::read_to_string(dir.path().join("coeffs.txt")).unwrap().contains("nu"));
}

#[test]
fn soliton_profile_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["soliton"], &tiny_config(dir.path()), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,R"));
    assert!(dir.path().join("profile.svg").exists());
}

#[test]
fn simulate_emits_run_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--eps", "0.5", "--frames", "2"], &tiny_config(dir.path()), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["errors.csv", "slice_x1.svg", "slice_x2.svg", "run_metadata.txt", "snapshot_000.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn converge_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["converge"], &tiny_config(dir.path()), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fitted slope"));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn nonresonance_on_wave_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["nonres"], &config("nlw_constant.toml"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("nonres.txt")).unwrap();
    assert!(text.contains("margin = 6.45"), "{text}");
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // the nonresonance checker needs a wave-type model
    let out = run(&["nonres"], &config("gp_cosprod.toml"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, TINY.replace("k0 = [0.4, 0.0]", "k0 = [0.7, 0.0]")).unwrap();
    assert_eq!(run(&["coeffs"], &bad, dir.path()).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bands"], &dir.path().join("missing.toml"), dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
