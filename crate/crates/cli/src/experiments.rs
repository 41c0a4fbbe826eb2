//! One runner per experiment kind.

use serde::Serialize;
use serde_json::{json, Map, Value};

use dgh_core::characteristics::{evolve_characteristics, transport_residual};
use dgh_core::diagnostics::{continuation_probe, support_interval, tail_decay_fit, vanishing_rectangle, Side};
use dgh_core::dissipative::{equivalence_report, map_solution, TransformSpec};
use dgh_core::helmholtz::apply_lambda2;
use dgh_core::invariants::{drift_series, Functional, FunctionalSeries, H2Variant};
use dgh_core::solver::{manufactured_forcing, rhs_nonlocal, simulate, DecayingSine};
use dgh_core::{Field, Grid, Sign, SimConfig, Termination, Trajectory};

use crate::scenario::{ExperimentKind, InitialSpec, Setup};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotOut {
    pub label: String,
    pub t: f64,
    pub u: Field,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub assertions: Vec<Assertion>,
    pub series: Vec<FunctionalSeries>,
    pub snapshots: Vec<SnapshotOut>,
    pub termination: Option<Termination>,
    pub warnings: Vec<String>,
    pub results: Map<String, Value>,
    /// Set when the numerics broke down; artifacts computed so far are kept.
    pub failure: Option<String>,
}

impl Report {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    fn result(&mut self, key: &str, value: impl Serialize) {
        self.results
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Record the trajectory's status; a non-finite stop is a numerical failure.
    fn absorb(&mut self, traj: &Trajectory) -> bool {
        self.termination = Some(traj.termination);
        self.warnings.extend(traj.warnings.iter().cloned());
        match traj.termination {
            Termination::NonFinite { time } => {
                self.failure = Some(format!("non-finite values at t = {time}"));
                false
            }
            Termination::BlowupGuard { time } => {
                self.result("blowup_time", time);
                true
            }
            Termination::Completed => true,
        }
    }
}

type Step = Result<(), dgh_core::Error>;

pub fn run(setup: &Setup) -> Report {
    let mut report = Report::default();
    let outcome = match setup.scenario.kind {
        ExperimentKind::FreeRun => free_run(setup, &mut report),
        ExperimentKind::SupportPropagation => support_propagation(setup, &mut report),
        ExperimentKind::TailFormation => tail_formation(setup, &mut report),
        ExperimentKind::ContinuationProbe => continuation(setup, &mut report),
        ExperimentKind::DissipativeEquivalence => dissipative(setup, &mut report),
        ExperimentKind::InvariantAudit => invariant_audit(setup, &mut report),
        ExperimentKind::ManufacturedConvergence => manufactured(setup, &mut report),
    };
    if let Err(e) = outcome {
        report.failure = Some(e.to_string());
    }
    report
}

fn u0(setup: &Setup) -> &Field {
    setup.u0.as_ref().expect("validated scenarios carry initial data")
}

fn functionals(grid: &Grid) -> Vec<Functional> {
    let mut f = vec![
        Functional::Energy,
        Functional::Mass,
        Functional::H2(H2Variant::AsWritten),
        Functional::H2(H2Variant::CubicGradient),
    ];
    if !grid.is_periodic() {
        f.push(Functional::WeightedMomentum(Sign::Plus));
        f.push(Functional::WeightedMomentum(Sign::Minus));
    }
    f
}

fn record_trajectory(traj: &Trajectory, report: &mut Report) -> Step {
    for f in functionals(traj.grid()) {
        report.series.push(drift_series(traj, f)?);
    }
    let s = &traj.snapshots;
    let mut picks = vec![0, s.len() / 2, s.len() - 1];
    picks.dedup();
    for &i in &picks {
        let label = match i {
            0 => "initial",
            i if i == s.len() - 1 => "final",
            _ => "middle",
        };
        report.snapshots.push(SnapshotOut {
            label: label.to_string(),
            t: s[i].t,
            u: s[i].u.clone(),
        });
    }
    let h2: Map<String, Value> = report
        .series
        .iter()
        .filter(|s| s.name.starts_with("h2_"))
        .map(|s| (s.name.clone(), json!(s.drift)))
        .collect();
    report.result("h2_drift", h2);
    Ok(())
}

fn free_run(setup: &Setup, report: &mut Report) -> Step {
    let traj = simulate(&setup.config, u0(setup), None)?;
    report.absorb(&traj);
    record_trajectory(&traj, report)
}

fn support_propagation(setup: &Setup, report: &mut Report) -> Step {
    let checks = &setup.scenario.checks;
    let Some(InitialSpec::Momentum(profile)) = &setup.scenario.initial else {
        unreachable!("validated");
    };
    let (a, b) = profile.support().expect("validated");
    let traj = simulate(&setup.config, u0(setup), None)?;
    if !report.absorb(&traj) {
        return Ok(());
    }
    record_trajectory(&traj, report)?;
    let seeds: Vec<f64> = (0..=32).map(|k| a + (b - a) * k as f64 / 32.0).collect();
    let paths = evolve_characteristics(&traj, &seeds)?;
    let residual = transport_residual(&traj, &paths, &setup.params)?;
    report.result("transport_residual_max", residual.max());

    let c = setup.params.momentum_shift();
    let h = setup.grid.spacing();
    let margin = checks.support_margin_cells * h;
    let last = seeds.len() - 1;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_leak = 0.0f64;
    let mut rows = Vec::new();
    let mut checked = 0;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        if k >= paths.q[0].len() || k >= paths.q[last].len() {
            break;
        }
        let shifted = apply_lambda2(&snap.u)?.map(|v| v + c);
        let peak = shifted.max_abs();
        let (lo, hi) = (paths.q[0][k] - margin, paths.q[last][k] + margin);
        let leak = leak_outside(&shifted, lo, hi) / peak.max(f64::MIN_POSITIVE);
        worst_leak = worst_leak.max(leak);
        let det = support_interval(&shifted, checks.support_relative * peak)?;
        let excess = det.interval.map_or(f64::NEG_INFINITY, |(x0, x1)| (lo - x0).max(x1 - hi));
        worst_excess = worst_excess.max(excess);
        rows.push(json!({ "t": snap.t, "detected": det.interval, "allowed": [lo, hi], "leak": leak }));
        checked += 1;
    }
    report.result("support", rows);
    report.result("support_leak_relative_max", worst_leak);
    report.check(
        "support_within_characteristics",
        checked == traj.snapshots.len() && worst_excess <= 0.0,
        format!(
            "{checked}/{} snapshots checked; worst overshoot {worst_excess:.3e} (threshold {:.1e} relative, margin {} cells); leak {worst_leak:.3e}",
            traj.snapshots.len(),
            checks.support_relative,
            checks.support_margin_cells
        ),
    );
    Ok(())
}

/// `max|f|` over nodes outside `[lo, hi]`.
fn leak_outside(f: &Field, lo: f64, hi: f64) -> f64 {
    let g = f.grid();
    (0..g.n())
        .filter(|&j| {
            let x = g.x(j);
            if g.is_periodic() {
                // Distance along the circle from the allowed arc.
                let rel = (x - lo).rem_euclid(1.0);
                rel > hi - lo
            } else {
                x < lo || x > hi
            }
        })
        .map(|j| f.values()[j].abs())
        .fold(0.0, f64::max)
}

fn tail_formation(setup: &Setup, report: &mut Report) -> Step {
    let checks = &setup.scenario.checks;
    let (a, b) = setup.scenario.initial.as_ref().and_then(|i| i.profile().support()).expect("validated");
    let traj = simulate(&setup.config, u0(setup), None)?;
    if !report.absorb(&traj) {
        return Ok(());
    }
    record_trajectory(&traj, report)?;
    let paths = evolve_characteristics(&traj, &[a, b])?;
    if paths.exited.iter().any(|&e| e) {
        report.check("tail_rates", false, "support characteristics left the grid".into());
        return Ok(());
    }
    let qa = *paths.q[0].last().expect("non-empty");
    let qb = *paths.q[1].last().expect("non-empty");
    let u = &traj.last().u;
    let (off, width) = (checks.tail_window_offset, checks.tail_window_width);
    let mut rates = Map::new();
    for (side, window, expected) in [
        (Side::Right, (qb + off, qb + off + width), -1.0),
        (Side::Left, (qa - off - width, qa - off), 1.0),
    ] {
        let name = format!("tail_rate_{}", if side == Side::Right { "right" } else { "left" });
        match tail_decay_fit(u, side, window) {
            Ok(fit) => {
                rates.insert(name.clone(), json!({ "rate": fit.rate, "window": [window.0, window.1], "points": fit.points }));
                report.check(
                    &name,
                    (fit.rate - expected).abs() <= checks.tail_rate_tolerance,
                    format!("rate {:.5} on [{:.3}, {:.3}], expected {expected} ± {}", fit.rate, window.0, window.1, checks.tail_rate_tolerance),
                );
            }
            Err(e) => report.check(&name, false, e.to_string()),
        }
    }
    report.result("tails", rates);
    report.result("momentum_support_image", [qa, qb]);
    Ok(())
}

fn continuation(setup: &Setup, report: &mut Report) -> Step {
    let checks = &setup.scenario.checks;
    let p = setup.params;
    let traj = simulate(&setup.config, u0(setup), None)?;
    if !report.absorb(&traj) {
        return Ok(());
    }
    record_trajectory(&traj, report)?;
    let mut worst = 0.0f64;
    let mut quiet_force = 0.0f64;
    let mut quiet_count = 0;
    for s in &traj.snapshots {
        let ut = rhs_nonlocal(&s.u, &p)?;
        let probe = continuation_probe(&s.u, &ut, &p, checks.quiet_tol)?;
        worst = worst.max(probe.residual_max);
        quiet_count += probe.quiet.len();
        for q in &probe.quiet {
            quiet_force = quiet_force.max(q.max_abs_big_f);
        }
    }
    report.result("probe_residual_max", worst);
    report.result("quiet_intervals", quiet_count);
    report.check(
        "continuation_identity",
        worst < checks.probe_residual_max,
        format!("max |F + u_t + (u + 2 omega) u_x| = {worst:.3e} (limit {:.1e})", checks.probe_residual_max),
    );
    report.check(
        "quiet_regions_force_free",
        quiet_force < checks.quiet_force_max,
        format!("{quiet_count} quiet intervals, max |F| there {quiet_force:.3e} (limit {:.1e})", checks.quiet_force_max),
    );
    let rects = vanishing_rectangle(&traj, checks.rectangle_tol)?;
    report.result("vanishing_rectangles", &rects);
    let trivial = traj.snapshots.iter().all(|s| s.u.max_abs() < checks.rectangle_tol);
    if trivial {
        let full = rects.len() == 1 && rects[0].t0 == 0.0 && rects[0].t1 == traj.t_final();
        report.check("zero_run_vanishes_everywhere", full, format!("{} rectangles", rects.len()));
    } else if setup.grid.is_periodic() {
        report.check(
            "no_vanishing_rectangle",
            rects.is_empty(),
            format!("{} rectangles at tol {:.1e}", rects.len(), checks.rectangle_tol),
        );
    }
    Ok(())
}

fn dissipative(setup: &Setup, report: &mut Report) -> Step {
    let checks = &setup.scenario.checks;
    let u0 = u0(setup);
    let direct = simulate(&setup.config, u0, None)?;
    if !report.absorb(&direct) {
        return Ok(());
    }
    record_trajectory(&direct, report)?;
    let spec = TransformSpec::new(setup.params.lambda, direct.t_final())?;
    let cons_cfg = SimConfig::new(setup.grid, setup.params.without_dissipation(), setup.config.dt, spec.tau_max())?
        .with_blowup_guard(setup.config.blowup_guard)?;
    let cons = simulate(&cons_cfg, u0, None)?;
    if !report.absorb(&cons) {
        return Ok(());
    }
    let mapped = map_solution(&cons, spec, &direct.times())?;
    report.warnings.extend(mapped.warnings.iter().cloned());
    let eq = equivalence_report(&direct, &mapped)?;
    report.series.push(FunctionalSeries::from_values("equivalence_max_error", eq.times.clone(), eq.max_error.clone()));
    report.result("tau_max", spec.tau_max());
    report.result("equivalence_max_error", eq.max());
    report.check(
        "dissipative_equivalence",
        eq.max() < checks.equivalence_max && eq.times.len() == direct.snapshots.len(),
        format!("max error {:.3e} over {} times (limit {:.1e})", eq.max(), eq.times.len(), checks.equivalence_max),
    );
    Ok(())
}

/// Which cubic Hamiltonian reading converges between a coarse and a refined
/// run: a conserved reading drops by 8x or reaches `floor`, a stalled one
/// loses less than half its drift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Study {
    pub ns: Vec<usize>,
    pub dts: Vec<f64>,
    pub drifts: Map<String, Value>,
    pub conserved: Option<String>,
}

pub fn h2_study(coarse: &Trajectory, fine: &Trajectory, floor: f64) -> Result<H2Study, dgh_core::Error> {
    let mut drifts = Map::new();
    let mut conserved = Vec::new();
    let mut stalled = Vec::new();
    for v in H2Variant::ALL {
        let d1 = drift_series(coarse, Functional::H2(v))?.drift;
        let d2 = drift_series(fine, Functional::H2(v))?.drift;
        drifts.insert(v.name().into(), json!([d1, d2]));
        if d2 <= floor || d2 <= d1 / 8.0 {
            conserved.push(v.name().to_string());
        } else if d2 > d1 / 2.0 {
            stalled.push(v.name());
        }
    }
    let conserved = if conserved.len() == 1 && stalled.len() == H2Variant::ALL.len() - 1 {
        conserved.pop()
    } else {
        None
    };
    Ok(H2Study {
        ns: vec![coarse.grid().n(), fine.grid().n()],
        dts: vec![coarse.config.dt, fine.config.dt],
        drifts,
        conserved,
    })
}

fn invariant_audit(setup: &Setup, report: &mut Report) -> Step {
    let checks = &setup.scenario.checks;
    let traj = simulate(&setup.config, u0(setup), None)?;
    if !report.absorb(&traj) {
        return Ok(());
    }
    record_trajectory(&traj, report)?;
    let energy = drift_series(&traj, Functional::Energy)?;
    if setup.params.lambda > 0.0 {
        let decreasing = energy.values.windows(2).all(|w| w[1] < w[0] + 1e-10);
        report.check("energy_decreasing", decreasing, format!("{} samples", energy.values.len()));
        report.result("h2_conserved", Value::Null);
        return Ok(());
    }
    let mass = drift_series(&traj, Functional::Mass)?;
    report.check(
        "energy_drift",
        energy.drift < checks.energy_drift_max,
        format!("{:.3e} (limit {:.1e})", energy.drift, checks.energy_drift_max),
    );
    report.check(
        "mass_drift",
        mass.drift < checks.mass_drift_max,
        format!("{:.3e} (limit {:.1e})", mass.drift, checks.mass_drift_max),
    );
    // Cubic functionals are not conserved by the truncated discretization,
    // so the study refines space and time together.
    let fine_grid = Grid::new(setup.grid.kind(), 2 * setup.grid.n(), setup.grid.half_width())?;
    let mut fine_cfg = setup.config.clone();
    fine_cfg.grid = fine_grid;
    fine_cfg.dt /= 2.0;
    fine_cfg.snapshot_stride *= 2;
    let init = setup.scenario.initial.as_ref().expect("validated");
    let fine = simulate(&fine_cfg, &init.velocity_on(&fine_grid, &setup.params)?, None)?;
    if !report.absorb(&fine) {
        return Ok(());
    }
    let study = h2_study(&traj, &fine, checks.drift_floor)?;
    report.check(
        "h2_discrimination",
        study.conserved.is_some(),
        format!("conserved: {}", study.conserved.as_deref().unwrap_or("undetermined")),
    );
    report.result("h2_conserved", &study.conserved);
    report.result("h2_study", &study);
    Ok(())
}

fn manufactured_error(grid: Grid, setup: &Setup, dt: f64) -> Result<(f64, Trajectory), dgh_core::Error> {
    let f = manufactured_forcing(DecayingSine::default(), setup.params);
    let cfg = SimConfig::new(grid, setup.params, dt, setup.config.t_end)?
        .with_stride(setup.config.snapshot_stride)?
        .with_blowup_guard(setup.config.blowup_guard)?;
    let u0 = f.exact_field(0.0, &grid)?;
    let traj = simulate(&cfg, &u0, Some(&f))?;
    let err = traj.last().u.max_abs_diff(&f.exact_field(traj.t_final(), &grid)?)?;
    Ok((err, traj))
}

fn manufactured(setup: &Setup, report: &mut Report) -> Step {
    let checks = &setup.scenario.checks;
    let f = manufactured_forcing(DecayingSine::default(), setup.params);
    let (err, traj) = manufactured_error(setup.grid, setup, setup.config.dt)?;
    if !report.absorb(&traj) {
        return Ok(());
    }
    record_trajectory(&traj, report)?;
    let errors: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| Ok(s.u.max_abs_diff(&f.exact_field(s.t, &setup.grid)?)?))
        .collect::<Result<_, dgh_core::Error>>()?;
    report.series.push(FunctionalSeries::from_values("manufactured_error", traj.times(), errors));
    report.result("final_error", err);
    report.check(
        "manufactured_error",
        err < checks.manufactured_error_max,
        format!("{err:.3e} at t = {} (limit {:.1e})", traj.t_final(), checks.manufactured_error_max),
    );

    let coarse = Grid::periodic(checks.order_n)?;
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for k in 0..checks.order_levels {
        let dt = checks.order_dt / 2f64.powi(k as i32);
        let (e, t) = manufactured_error(coarse, setup, dt)?;
        if !report.absorb(&t) {
            return Ok(());
        }
        dts.push(dt);
        errs.push(e);
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = orders.iter().all(|o| (o - checks.order_target).abs() <= checks.order_tolerance);
    report.result("order_study", json!({ "n": checks.order_n, "dts": dts, "errors": errs, "orders": orders }));
    report.check(
        "temporal_order",
        ok,
        format!("orders {orders:.3?}, expected {} ± {}", checks.order_target, checks.order_tolerance),
    );
    Ok(())
}
