//! Run artifacts: metadata, CSV tables, SVG plots and the summary.

use plotters::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};
use std::fs;
use std::io;
use std::path::Path;

use dgh_core::helmholtz::apply_lambda2;
use dgh_core::invariants::FunctionalSeries;
use dgh_core::{Field, Termination};

use crate::experiments::{Assertion, Report, SnapshotOut};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    AssertionFailed,
    ConfigError,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::AssertionFailed => 1,
            Status::ConfigError => 2,
            Status::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub status: Status,
    pub exit_code: i32,
    pub scenario: Option<&'a crate::scenario::Scenario>,
    pub config_path: Option<String>,
    pub termination: Option<Termination>,
    pub assertions: &'a [Assertion],
    pub results: &'a Map<String, Value>,
    /// `h2_as_written`, `h2_cubic_gradient`, or null when not determined.
    pub h2_conserved: Value,
    pub warnings: &'a [String],
    pub error: Option<String>,
    pub artifacts: Vec<String>,
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

pub fn write_series_csv(path: &Path, s: &FunctionalSeries) -> io::Result<()> {
    let mut out = String::from("t,value,drift\n");
    for ((t, v), d) in s.times.iter().zip(&s.values).zip(s.drifts()) {
        out.push_str(&format!("{t},{v},{d}\n"));
    }
    fs::write(path, out)
}

pub fn write_snapshot_csv(path: &Path, u: &Field) -> io::Result<()> {
    let m = apply_lambda2(u).map_err(io::Error::other)?;
    let g = u.grid();
    let mut out = String::from("x,u,m\n");
    for j in 0..g.n() {
        out.push_str(&format!("{},{},{}\n", g.x(j), u.values()[j], m.values()[j]));
    }
    fs::write(path, out)
}

const COLORS: [RGBColor; 6] = [RED, BLUE, GREEN, MAGENTA, CYAN, BLACK];

fn plot_err<E: std::fmt::Debug>(e: E) -> io::Error {
    io::Error::other(format!("{e:?}"))
}

/// Drift of each series on a log axis; zero drift is clamped to `1e-17`.
pub fn plot_drift(path: &Path, series: &[FunctionalSeries]) -> io::Result<()> {
    let floor = 1e-17;
    let t_max = series
        .iter()
        .flat_map(|s| s.times.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let d_max = series
        .iter()
        .flat_map(|s| s.drifts())
        .fold(floor * 10.0, f64::max)
        * 10.0;
    let root = SVGBackend::new(path, (800, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("relative drift", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(0.0..t_max, (floor..d_max).log_scale())
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("t").y_desc("drift").draw().map_err(plot_err)?;
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = s.times.iter().copied().zip(s.drifts().into_iter().map(|d| d.max(floor))).collect();
        chart
            .draw_series(LineSeries::new(pts, color))
            .map_err(plot_err)?
            .label(s.name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

pub fn plot_snapshots(path: &Path, snaps: &[SnapshotOut]) -> io::Result<()> {
    let Some(first) = snaps.first() else {
        return Ok(());
    };
    let (lo, hi) = first.u.grid().node_range();
    let peak = snaps.iter().map(|s| s.u.max_abs()).fold(0.0f64, f64::max).max(1e-12) * 1.1;
    let root = SVGBackend::new(path, (800, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("u(t, x)", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(lo..hi, -peak..peak)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("x").y_desc("u").draw().map_err(plot_err)?;
    for (k, s) in snaps.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let g = s.u.grid();
        let pts: Vec<(f64, f64)> = (0..g.n()).map(|j| (g.x(j), s.u.values()[j])).collect();
        chart
            .draw_series(LineSeries::new(pts, color))
            .map_err(plot_err)?
            .label(format!("t = {}", s.t))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

pub fn summary_text(name: &str, status: Status, assertions: &[Assertion], error: Option<&str>) -> String {
    let mut out = format!("scenario {name}: {status:?}\n");
    for a in assertions {
        let mark = if a.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{mark} {}: {}\n", a.name, a.detail));
    }
    if let Some(e) = error {
        out.push_str(&format!("error: {e}\n"));
    }
    out
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// Write every table, snapshot and plot of `report` into `dir`, returning
/// the file names. Failures of presentation-only plots become warnings.
pub fn write_artifacts(dir: &Path, report: &mut Report) -> io::Result<Vec<String>> {
    let mut names = Vec::new();
    for s in &report.series {
        let name = format!("series_{}.csv", file_safe(&s.name));
        write_series_csv(&dir.join(&name), s)?;
        names.push(name);
    }
    for s in &report.snapshots {
        let name = format!("snapshot_{}.csv", file_safe(&s.label));
        write_snapshot_csv(&dir.join(&name), &s.u)?;
        names.push(name);
    }
    let drift: Vec<FunctionalSeries> = report.series.clone();
    if !drift.is_empty() {
        match plot_drift(&dir.join("drift.svg"), &drift) {
            Ok(()) => names.push("drift.svg".into()),
            Err(e) => report.warnings.push(format!("drift plot skipped: {e}")),
        }
    }
    if !report.snapshots.is_empty() {
        match plot_snapshots(&dir.join("snapshots.svg"), &report.snapshots) {
            Ok(()) => names.push("snapshots.svg".into()),
            Err(e) => report.warnings.push(format!("snapshot plot skipped: {e}")),
        }
    }
    Ok(names)
}
