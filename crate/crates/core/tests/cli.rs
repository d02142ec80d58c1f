use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_supertime"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(bin()).args(args).arg("--config").arg(config).output().unwrap()
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let col = r.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    r.records().map(|rec| rec.unwrap()[col].to_string()).collect()
}

const EARTH: &str = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 5.972e24, "separation_d": 1e-6}}}"#;

#[test]
fn bound_to_stdout() {
    let dir = TempDir::new().unwrap();
    let out = run(&["bound"], &write(&dir, "earth.json", EARTH));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let t: f64 = column(&text, "T_seconds")[0].parse().unwrap();
    assert!((t / 9.15e17 - 1.0).abs() < 1e-3, "{t}");
    let meta: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(meta["subcommand"], "bound");
}

#[test]
fn output_file_and_metadata() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "earth.json", EARTH);
    let csv_path = dir.path().join("out.csv");
    let out = Command::new(bin())
        .args(["bound", "--seed", "42", "--config"])
        .arg(&config)
        .arg("--output")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let header = fs::read_to_string(&csv_path).unwrap();
    assert!(header.starts_with("sweep_index,sweep_value,kind,magnitude_kg_or_C,separation_d_m,"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["config"]["scenario"]["alice"]["magnitude"], 5.972e24);
    assert_eq!(meta["constants"]["c"], 299792458.0);
    assert!(meta["version"].is_string());
}

#[test]
fn unknown_key_rejected_with_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-6, "mas": 2}}}"#;
    let out = run(&["bound"], &write(&dir, "bad.json", bad));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("mas") && err.lines().count() == 1, "{err}");
}

#[test]
fn missing_config_and_bad_subcommand() {
    let out = Command::new(bin()).args(["bound", "--config", "/nonexistent.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin()).args(["warp", "--config", "x.json"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn physics_failure_exits_1_but_keeps_other_rows() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"scenario": {"alice": {"kind": "mass", "magnitude": 1.0, "separation_d": 1e-3}, "bob_mass": 1.0},
        "sweep": {"parameter": "R", "min": 1e-3, "max": 1.0, "points": 4}}"#;
    let out = run(&["echo"], &write(&dir, "echo.json", text));
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let errors = column(&text, "error");
    assert_eq!(errors.len(), 4);
    assert!(errors[0].contains("dipole"));
    assert!(errors[1..].iter().all(String::is_empty));
}

#[test]
fn causality_sweep_respects_light_cone() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"scenario": {"alice": {"kind": "charge", "magnitude": 1e-15, "separation_d": 1e-6}, "bob_mass": 1e-3, "bob_charge": 1e-15, "R": 1.0},
        "sweep": {"parameter": "R", "min": 1e-4, "max": 1e6, "points": 100, "scale": "log"}}"#;
    let out = run(&["causality"], &write(&dir, "c.json", text));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(column(&text, "satisfied").iter().all(|s| s == "true"));
    let r: Vec<f64> = column(&text, "R_m").iter().map(|s| s.parse().unwrap()).collect();
    assert!(r.windows(2).all(|w| w[1] > w[0]), "rows keep sweep order");
}

#[test]
fn seed_changes_interference_but_not_determinism() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"scenario": {"alice": {"kind": "charge", "magnitude": 1e-18, "separation_d": 1e-5}},
        "interference": {"sigma": 1e-6, "n_samples": 200, "trials": 50, "noise_min": 0.5, "noise_max": 2.0, "levels": 4}}"#;
    let config = write(&dir, "i.json", text);
    let a = run(&["interference", "--seed", "1"], &config).stdout;
    let b = run(&["interference", "--seed", "1"], &config).stdout;
    let c = run(&["interference", "--seed", "2"], &config).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn tabulated_trajectory_resolves_relative_to_config() {
    let dir = TempDir::new().unwrap();
    let (d, t0) = (1e-3, 1e-9);
    let mut table = String::from("t,x\n");
    for i in 0..=400 {
        let t = t0 * i as f64 / 400.0;
        let s = (std::f64::consts::PI * t / (2.0 * t0)).sin();
        table.push_str(&format!("{t:e},{:e}\n", d * s * s));
    }
    write(&dir, "path.csv", &table);
    let q = 4.0 * 1.875_545_956e-18;
    let tab = format!(
        r#"{{"scenario": {{"alice": {{"kind": "charge", "magnitude": {q:e}, "separation_d": {d:e}}}}}, "radiation": {{"trajectory_csv": "path.csv"}}}}"#
    );
    let closed = format!(
        r#"{{"scenario": {{"alice": {{"kind": "charge", "magnitude": {q:e}, "separation_d": {d:e}}}}}, "radiation": {{"t0": {t0:e}}}}}"#
    );
    let a = run(&["radiation"], &write(&dir, "tab.json", &tab));
    let b = run(&["radiation"], &write(&dir, "closed.json", &closed));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let ea: f64 = column(&String::from_utf8(a.stdout).unwrap(), "exponent")[0].parse().unwrap();
    let eb: f64 = column(&String::from_utf8(b.stdout).unwrap(), "exponent")[0].parse().unwrap();
    assert!((ea / eb - 1.0).abs() < 1e-4, "{ea} vs {eb}");
}

#[test]
fn vacuum_box_window_diverges() {
    let dir = TempDir::new().unwrap();
    write(&dir, "box.csv", "t,phi\n-1e-9,5e8\n1e-9,5e8\n");
    let text = r#"{"scenario": {"alice": {"kind": "charge", "magnitude": 1e-17, "separation_d": 1e-6}}, "vacuum": {"window_csv": "box.csv"}}"#;
    let out = run(&["vacuum"], &write(&dir, "v.json", text));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("diverges"));
}
