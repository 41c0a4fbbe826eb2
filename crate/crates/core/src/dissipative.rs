//! Exponential time change between the weakly dissipative equation
//! `u_t = rhs(u) - λu` and the conservative one, for `γ = -2ω`.
//!
//! With `τ(t) = (1 - e^{-λt})/λ`,
//!
//! ```text
//! u(t, x) = e^{-λt} v(τ(t), x + γ(t - τ(t)))
//! ```
//!
//! maps a conservative solution `v` onto a dissipative one. The spatial
//! shift compensates the `γ u_x` drift, whose coefficient is not rescaled by
//! the amplitude factor; it vanishes when `γ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::Field;
use crate::solver::{Snapshot, Termination, Trajectory};

/// Below this `λ` the clock uses its Taylor series.
pub const SERIES_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSpec {
    pub lambda: f64,
    pub t_max: f64,
}

impl TransformSpec {
    pub fn new(lambda: f64, t_max: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be non-negative, got {t_max}"
            )));
        }
        Ok(Self { lambda, t_max })
    }

    /// `τ(t_max)`, always below `1/λ`.
    pub fn tau_max(&self) -> f64 {
        to_conservative_time(self.t_max, self.lambda).expect("validated")
    }
}

/// `τ = (1 - e^{-λt})/λ`.
pub fn to_conservative_time(t: f64, lambda: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be non-negative, got {t}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    if lambda < SERIES_CUTOFF {
        return Ok(t - lambda * t * t / 2.0 + lambda * lambda * t * t * t / 6.0);
    }
    if t.is_infinite() {
        return Ok(1.0 / lambda);
    }
    Ok(-(-lambda * t).exp_m1() / lambda)
}

/// Dissipative-time snapshots at `times` built from a conservative
/// trajectory. The conservative run must have `γ = -2ω` and cover `τ(t)`
/// for every requested `t`.
pub fn map_solution(conservative: &Trajectory, spec: TransformSpec, times: &[f64]) -> Result<Trajectory> {
    let params = conservative.config.params;
    if params.lambda != 0.0 {
        return Err(Error::Precondition(
            "the source trajectory must be conservative (lambda = 0)".into(),
        ));
    }
    if !params.is_reduced() {
        return Err(Error::Precondition(format!(
            "the transform needs gamma = -2 omega (omega={}, gamma={})",
            params.omega, params.gamma
        )));
    }
    let grid = *conservative.grid();
    let src_t = conservative.times();
    let lambda = spec.lambda;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut warnings = Vec::new();
    for &t in times {
        if t > spec.t_max * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(t));
        }
        let tau = to_conservative_time(t, lambda)?;
        let v = interpolate_in_time(conservative, &src_t, tau)?;
        let shift = params.gamma * (t - tau);
        let shifted = if shift == 0.0 {
            v
        } else if grid.is_periodic() {
            fourier::shift(&v, shift)
        } else {
            let field = Field::from_parts(grid, v);
            let mut outside = false;
            let out = (0..grid.n())
                .map(|j| {
                    field.interpolate(grid.x(j) + shift).unwrap_or_else(|| {
                        outside = true;
                        0.0
                    })
                })
                .collect();
            if outside {
                warnings.push(format!("t={t}: shift {shift:.3e} reaches past the grid; padded with 0"));
            }
            out
        };
        let amp = (-lambda * t).exp();
        let u = Field::new(grid, shifted.into_iter().map(|x| amp * x).collect())?;
        snapshots.push(Snapshot { t, u });
    }
    let mut config = conservative.config.clone();
    config.params.lambda = lambda;
    config.t_end = spec.t_max;
    Ok(Trajectory {
        config,
        snapshots,
        termination: Termination::Completed,
        warnings,
    })
}

/// Four-point Lagrange interpolation in time between snapshot fields.
fn interpolate_in_time(traj: &Trajectory, times: &[f64], tau: f64) -> Result<Vec<f64>> {
    let (i, _) = traj.bracket(tau)?;
    let s = &traj.snapshots;
    if s.len() == 1 {
        return Ok(s[0].u.values().to_vec());
    }
    let width = s.len().min(4);
    let start = i.saturating_sub(1).min(s.len() - width);
    let idx: Vec<usize> = (start..start + width).collect();
    let weights: Vec<f64> = idx
        .iter()
        .map(|&a| {
            idx.iter()
                .filter(|&&b| b != a)
                .map(|&b| (tau - times[b]) / (times[a] - times[b]))
                .product()
        })
        .collect();
    let n = traj.grid().n();
    Ok((0..n)
        .map(|j| idx.iter().zip(&weights).map(|(&a, w)| w * s[a].u.values()[j]).sum())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub times: Vec<f64>,
    pub max_error: Vec<f64>,
    /// `(∫ (a - b)²)^½` per aligned time.
    pub l2_error: Vec<f64>,
}

impl EquivalenceReport {
    pub fn max(&self) -> f64 {
        self.max_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Compare the snapshots of two trajectories at the times they share.
pub fn equivalence_report(direct: &Trajectory, mapped: &Trajectory) -> Result<EquivalenceReport> {
    if direct.grid() != mapped.grid() {
        return Err(Error::GridMismatch);
    }
    let mut report = EquivalenceReport {
        times: Vec::new(),
        max_error: Vec::new(),
        l2_error: Vec::new(),
    };
    let mut k = 0;
    for m in &mapped.snapshots {
        let close = |t: f64| (t - m.t).abs() <= 1e-9 * (1.0 + m.t.abs());
        while k < direct.snapshots.len() && direct.snapshots[k].t < m.t && !close(direct.snapshots[k].t) {
            k += 1;
        }
        if k < direct.snapshots.len() && close(direct.snapshots[k].t) {
            let d = &direct.snapshots[k].u - &m.u;
            report.times.push(m.t);
            report.max_error.push(d.max_abs());
            report.l2_error.push(d.map(|v| v * v).integrate().sqrt());
        }
    }
    if report.times.is_empty() {
        return Err(Error::Precondition("trajectories share no snapshot times".into()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_values() {
        assert_eq!(to_conservative_time(1.0, 0.0).unwrap(), 1.0);
        assert!((to_conservative_time(1.0, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        let e = (-1.0f64).exp();
        assert!((to_conservative_time(1.0, 1.0).unwrap() - (1.0 - e)).abs() < 1e-15);
        assert!((to_conservative_time(1.0, 1.0).unwrap() - 0.632_121).abs() < 1e-6);
        assert!((to_conservative_time(1e3, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(to_conservative_time(f64::INFINITY, 2.0).unwrap(), 0.5);
        assert!(to_conservative_time(-1.0, 1.0).is_err());
        assert!(to_conservative_time(1.0, -1.0).is_err());
    }

    #[test]
    fn series_and_closed_form_agree_across_cutoff() {
        let lambda = 0.99 * SERIES_CUTOFF;
        let series = to_conservative_time(2.0, lambda).unwrap();
        let closed = -(-lambda * 2.0f64).exp_m1() / lambda;
        assert!((series - closed).abs() < 1e-14);
    }

    #[test]
    fn spec_horizon_is_below_inverse_lambda() {
        let s = TransformSpec::new(0.5, 3.0).unwrap();
        assert!(s.tau_max() < 2.0);
        assert!(TransformSpec::new(-1.0, 1.0).is_err());
    }
}
