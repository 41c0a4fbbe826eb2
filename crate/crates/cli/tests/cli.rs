use std::fs;
use std::path::Path;
use std::process::Command;

use dgh_lab::scenario::Scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dgh-lab"))
}

fn scenarios_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
}

fn metadata(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

const ZERO_RUN: &str = r#"
name = "zero"
kind = "free_run"
[grid]
kind = "periodic"
n = 32
[params]
omega = 0.1
gamma = -0.2
[initial.velocity]
family = "zero"
[solver]
dt = 0.01
t_end = 0.2
snapshot_stride = 5
"#;

#[test]
fn list_describe_version() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 7);

    let out = bin().args(["describe", "TailFormation"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("e^{-x}") && text.contains("compact"));

    let out = bin().args(["describe", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("version").output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("dgh-lab "));
}

#[test]
fn zero_free_run_writes_zero_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("zero.toml");
    fs::write(&cfg, ZERO_RUN).unwrap();
    let root = tmp.path().join("out");
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env("DGH_LAB_OUTPUT_ROOT", &root)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("Passed"));
    let dir = root.join("zero");
    let meta = metadata(&dir);
    assert_eq!(meta["status"], "passed");
    assert_eq!(meta["termination"]["status"], "completed");
    for name in ["series_energy_h1.csv", "series_mass.csv", "snapshot_final.csv"] {
        let text = fs::read_to_string(dir.join(name)).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header == "t,value,drift" || header == "x,u,m", "{header}");
        for line in lines {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!(cols[1..].iter().all(|&v| v == 0.0), "{name}: {line}");
        }
    }
    assert!(dir.join("drift.svg").exists() && dir.join("summary.txt").exists());
}

#[test]
fn tables_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let s = Scenario::from_toml(&fs::read_to_string(scenarios_dir().join("dissipative_equivalence.toml")).unwrap()).unwrap();
    let a = dgh_lab::run_scenario(&s, &tmp.path().join("a"), None);
    let b = dgh_lab::run_scenario(&s, &tmp.path().join("b"), None);
    assert_eq!(a.exit_code(), 0, "{}", a.text);
    for entry in fs::read_dir(&a.dir).unwrap() {
        let name = entry.unwrap().file_name();
        if name.to_string_lossy().ends_with(".csv") {
            assert_eq!(fs::read(a.dir.join(&name)).unwrap(), fs::read(b.dir.join(&name)).unwrap());
        }
    }
}

#[test]
fn config_errors_exit_2_and_still_write_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    for (stem, text) in [
        ("typo", ZERO_RUN.replace("t_end", "t_edn")),
        ("cfl", ZERO_RUN.replace("dt = 0.01", "dt = 0.5")),
        ("grid", ZERO_RUN.replace("n = 32", "n = 8")),
    ] {
        let cfg = tmp.path().join(format!("{stem}.toml"));
        fs::write(&cfg, text).unwrap();
        let summary = dgh_lab::run_file(&cfg, tmp.path());
        assert_eq!(summary.exit_code(), 2, "{stem}: {}", summary.text);
        let meta = metadata(&summary.dir);
        assert_eq!(meta["status"], "config_error");
        assert!(meta["error"].as_str().unwrap().len() > 3);
    }
    let missing = dgh_lab::run_file(&tmp.path().join("absent.toml"), tmp.path());
    assert_eq!(missing.exit_code(), 2);
}

#[test]
fn overflow_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = ZERO_RUN
        .replace("family = \"zero\"", "family = \"cosine\"\namplitude = 1e200")
        .replace("dt = 0.01", "dt = 1e-203")
        .replace("t_end = 0.2", "t_end = 3e-203\nblowup_guard = 1e308");
    let s = Scenario::from_toml(&text).unwrap();
    let summary = dgh_lab::run_scenario(&s, tmp.path(), None);
    assert_eq!(summary.exit_code(), 3, "{}", summary.text);
    let meta = metadata(&summary.dir);
    assert_eq!(meta["termination"]["status"], "non_finite");
    assert!(summary.dir.join("series_energy_h1.csv").exists());
}

#[test]
fn assertion_failures_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let text = ZERO_RUN
        .replace("free_run", "invariant_audit")
        .replace("family = \"zero\"", "family = \"cosine\"\namplitude = 0.2")
        .replace("snapshot_stride = 5", "snapshot_stride = 5\n[checks]\nenergy_drift_max = 1e-30");
    let s = Scenario::from_toml(&text).unwrap();
    let summary = dgh_lab::run_scenario(&s, tmp.path(), None);
    assert_eq!(summary.exit_code(), 1, "{}", summary.text);
    assert!(summary.text.contains("FAIL energy_drift"));
}

#[test]
fn bundled_scenarios_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let summary = dgh_lab::run_file(&path, tmp.path());
        assert_eq!(summary.exit_code(), 0, "{}: {}", path.display(), summary.text);
        seen += 1;
    }
    assert!(seen >= 7);
}

#[test]
fn audit_records_the_conserved_hamiltonian() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = dgh_lab::run_file(&scenarios_dir().join("h2_discrimination.toml"), tmp.path());
    assert_eq!(summary.exit_code(), 0, "{}", summary.text);
    assert_eq!(metadata(&summary.dir)["h2_conserved"], "h2_cubic_gradient");
}

#[test]
fn steepening_run_records_the_guard_time() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = dgh_lab::run_file(&scenarios_dir().join("free_run_blowup.toml"), tmp.path());
    let meta = metadata(&summary.dir);
    assert_eq!(meta["termination"]["status"], "blowup_guard");
    let t = meta["results"]["blowup_time"].as_f64().unwrap();
    assert!(t > 0.0 && t < 1.0);
}
