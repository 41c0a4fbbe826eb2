//! Batch experiments on the DGH equation driven by TOML scenario files.
//!
//! Every run writes into `<output root>/<output_dir>`:
//!
//! - `metadata.json`: status, exit code, scenario echo, assertion list and
//!   numeric results, always written, also when the config is rejected;
//! - `series_<functional>.csv`: columns `t,value,drift`;
//! - `snapshot_<label>.csv`: columns `x,u,m`;
//! - `drift.svg`, `snapshots.svg`;
//! - `summary.txt`: one PASS/FAIL line per assertion.

pub mod experiments;
pub mod output;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use output::{Metadata, Status};
use scenario::{ConfigError, Scenario};

/// Environment variable that overrides the output root.
pub const OUTPUT_ROOT_VAR: &str = "DGH_LAB_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "dgh-lab-output";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub status: Status,
    pub dir: PathBuf,
    pub text: String,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Load, validate and run the scenario at `path`.
pub fn run_file(path: &Path, root: &Path) -> RunSummary {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let parsed = fs::read_to_string(path)
        .map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })
        .and_then(|text| Scenario::from_toml(&text));
    match parsed {
        Ok(s) => run_scenario(&s, root, Some(path)),
        Err(e) => config_failure(&root.join(&stem), &stem, None, Some(path), &e),
    }
}

pub fn run_scenario(scenario: &Scenario, root: &Path, config_path: Option<&Path>) -> RunSummary {
    let dir = root.join(scenario.output_dir());
    let setup = match scenario.setup() {
        Ok(s) => s,
        Err(e) => return config_failure(&dir, &scenario.name, Some(scenario), config_path, &e),
    };
    if let Err(e) = fs::create_dir_all(&dir) {
        return RunSummary {
            status: Status::NumericalFailure,
            text: format!("cannot create {}: {e}\n", dir.display()),
            dir,
        };
    }
    let mut report = experiments::run(&setup);
    let artifacts = match output::write_artifacts(&dir, &mut report) {
        Ok(a) => a,
        Err(e) => {
            report.failure.get_or_insert(format!("writing artifacts: {e}"));
            Vec::new()
        }
    };
    let status = if report.failure.is_some() {
        Status::NumericalFailure
    } else if report.all_passed() {
        Status::Passed
    } else {
        Status::AssertionFailed
    };
    let h2 = report.results.get("h2_conserved").cloned().unwrap_or(Value::Null);
    let meta = Metadata {
        tool: "dgh-lab",
        version: env!("CARGO_PKG_VERSION"),
        status,
        exit_code: status.exit_code(),
        scenario: Some(scenario),
        config_path: config_path.map(|p| p.display().to_string()),
        termination: report.termination,
        assertions: &report.assertions,
        results: &report.results,
        h2_conserved: h2,
        warnings: &report.warnings,
        error: report.failure.clone(),
        artifacts,
    };
    finish(dir, &scenario.name, status, &meta, &report.assertions, report.failure.as_deref())
}

fn config_failure(
    dir: &Path,
    name: &str,
    scenario: Option<&Scenario>,
    config_path: Option<&Path>,
    err: &ConfigError,
) -> RunSummary {
    let empty = Map::new();
    let meta = Metadata {
        tool: "dgh-lab",
        version: env!("CARGO_PKG_VERSION"),
        status: Status::ConfigError,
        exit_code: Status::ConfigError.exit_code(),
        scenario,
        config_path: config_path.map(|p| p.display().to_string()),
        termination: None,
        assertions: &[],
        results: &empty,
        h2_conserved: Value::Null,
        warnings: &[],
        error: Some(err.to_string()),
        artifacts: Vec::new(),
    };
    let msg = err.to_string();
    finish(dir.to_path_buf(), name, Status::ConfigError, &meta, &[], Some(&msg))
}

fn finish(
    dir: PathBuf,
    name: &str,
    status: Status,
    meta: &Metadata<'_>,
    assertions: &[experiments::Assertion],
    error: Option<&str>,
) -> RunSummary {
    let mut text = output::summary_text(name, status, assertions, error);
    let written = fs::create_dir_all(&dir)
        .and_then(|_| output::write_json(&dir.join("metadata.json"), meta))
        .and_then(|_| fs::write(dir.join("summary.txt"), &text));
    if let Err(e) = written {
        text.push_str(&format!("warning: could not write metadata to {}: {e}\n", dir.display()));
    }
    RunSummary { status, dir, text }
}
