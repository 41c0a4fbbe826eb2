//! Particle paths `dq/dt = u(t, q) - γ`, `q(0, x) = x`, and the stretch
//! `q_x = exp(∫₀ᵗ u_x(s, q(s, x)) ds)` integrated along each path.
//!
//! Along these paths the shifted momentum obeys
//! `m₀(x) + c = (m(t, q) + c) q_x²` with `c = ω + γ/2`;
//! [`transport_residual`] measures how well a trajectory satisfies it.
//!
//! Positions on periodic grids are stored unwrapped (they may leave
//! `[0, 1)`); evaluation wraps them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::helmholtz::apply_lambda2;
use crate::solver::{PhysParams, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicPaths {
    pub seeds: Vec<f64>,
    pub times: Vec<f64>,
    /// `q[s][k]`: position of seed `s` at `times[k]`. Shorter than `times`
    /// when the path left a line grid.
    pub q: Vec<Vec<f64>>,
    /// Stretch from the exponential formula, same layout as `q`.
    pub qx: Vec<Vec<f64>>,
    /// Seeds whose paths left the interior of a line grid.
    pub exited: Vec<bool>,
}

impl CharacteristicPaths {
    /// True when every pair of seeds keeps its order at every shared time.
    pub fn is_monotone(&self) -> bool {
        let mut order: Vec<usize> = (0..self.seeds.len()).collect();
        order.sort_by(|&a, &b| self.seeds[a].total_cmp(&self.seeds[b]));
        order.windows(2).all(|w| {
            let (a, b) = (&self.q[w[0]], &self.q[w[1]]);
            a.iter().zip(b).all(|(x, y)| x < y)
        })
    }

    pub fn min_stretch(&self) -> f64 {
        self.qx.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// `q_x` by centred differences of `q` across neighbouring seeds
    /// (one-sided at the ends). Seeds must be strictly increasing.
    pub fn qx_by_differencing(&self) -> Result<Vec<Vec<f64>>> {
        let s = &self.seeds;
        if s.len() < 2 || s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "differencing needs at least two strictly increasing seeds".into(),
            ));
        }
        let n = s.len();
        Ok((0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                let len = self.q[a].len().min(self.q[b].len()).min(self.q[i].len());
                (0..len)
                    .map(|k| (self.q[b][k] - self.q[a][k]) / (s[b] - s[a]))
                    .collect()
            })
            .collect())
    }
}

/// Trace characteristics through the snapshots of `traj`.
///
/// `u` is interpolated cubically in space and linearly in time; RK4
/// sub-steps are no longer than the trajectory's time step.
pub fn evolve_characteristics(traj: &Trajectory, seeds: &[f64]) -> Result<CharacteristicPaths> {
    let grid = *traj.grid();
    let gamma = traj.config.params.gamma;
    if !grid.is_periodic() {
        let (lo, hi) = grid.node_range();
        if let Some(&bad) = seeds.iter().find(|&&x| !(x >= lo && x <= hi)) {
            return Err(Error::Precondition(format!(
                "seed {bad} lies outside the grid interior [{lo}, {hi}]"
            )));
        }
    }
    if seeds.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition("seeds must be finite".into()));
    }

    let snaps = &traj.snapshots;
    let ux: Vec<Field> = snaps
        .iter()
        .map(|s| s.u.derivative(1))
        .collect::<Result<_>>()?;
    // Velocity and gradient at (t between snapshots i and i+1, x).
    let sample = |i: usize, w: f64, x: f64| -> Option<(f64, f64)> {
        let j = (i + 1).min(snaps.len() - 1);
        let u0 = snaps[i].u.interpolate(x)?;
        let u1 = snaps[j].u.interpolate(x)?;
        let d0 = ux[i].interpolate(x)?;
        let d1 = ux[j].interpolate(x)?;
        Some(((1.0 - w) * u0 + w * u1, (1.0 - w) * d0 + w * d1))
    };

    let times = traj.times();
    let mut q = Vec::with_capacity(seeds.len());
    let mut qx = Vec::with_capacity(seeds.len());
    let mut exited = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut pos = seed;
        let mut log_stretch = 0.0;
        let mut qs = vec![seed];
        let mut qxs = vec![1.0];
        let mut left = false;
        'intervals: for i in 0..snaps.len().saturating_sub(1) {
            let span = times[i + 1] - times[i];
            let sub = (span / traj.config.dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / sub as f64;
            for k in 0..sub {
                let w0 = k as f64 / sub as f64;
                let wm = (k as f64 + 0.5) / sub as f64;
                let w1 = (k + 1) as f64 / sub as f64;
                let f = |w: f64, x: f64| sample(i, w, x).map(|(u, d)| (u - gamma, d));
                let Some((a1, b1)) = f(w0, pos) else {
                    left = true;
                    break 'intervals;
                };
                let Some((a2, b2)) = f(wm, pos + 0.5 * h * a1) else {
                    left = true;
                    break 'intervals;
                };
                let Some((a3, b3)) = f(wm, pos + 0.5 * h * a2) else {
                    left = true;
                    break 'intervals;
                };
                let Some((a4, b4)) = f(w1, pos + h * a3) else {
                    left = true;
                    break 'intervals;
                };
                pos += h / 6.0 * (a1 + 2.0 * (a2 + a3) + a4);
                log_stretch += h / 6.0 * (b1 + 2.0 * (b2 + b3) + b4);
            }
            if !grid.is_periodic() && snaps[i + 1].u.interpolate(pos).is_none() {
                left = true;
                break;
            }
            qs.push(pos);
            qxs.push(log_stretch.exp());
        }
        q.push(qs);
        qx.push(qxs);
        exited.push(left);
    }
    Ok(CharacteristicPaths {
        seeds: seeds.to_vec(),
        times,
        q,
        qx,
        exited,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportResidual {
    pub times: Vec<f64>,
    /// `max_s |(m₀(x_s) + c) - (m(t, q_s) + c) q_x²|` per recorded time.
    pub max_residual: Vec<f64>,
}

impl TransportResidual {
    pub fn max(&self) -> f64 {
        self.max_residual.iter().copied().fold(0.0, f64::max)
    }
}

pub fn transport_residual(
    traj: &Trajectory,
    paths: &CharacteristicPaths,
    p: &PhysParams,
) -> Result<TransportResidual> {
    if paths.times.len() != traj.snapshots.len() {
        return Err(Error::Precondition(
            "paths were not computed from this trajectory".into(),
        ));
    }
    let c = p.momentum_shift();
    let m: Vec<Field> = traj
        .snapshots
        .iter()
        .map(|s| apply_lambda2(&s.u))
        .collect::<Result<_>>()?;
    let m0: Vec<f64> = paths
        .seeds
        .iter()
        .map(|&x| m[0].interpolate(x).unwrap_or(f64::NAN))
        .collect();
    let mut max_residual = vec![0.0f64; paths.times.len()];
    for (s, (qs, qxs)) in paths.q.iter().zip(&paths.qx).enumerate() {
        for (k, (&pos, &stretch)) in qs.iter().zip(qxs).enumerate() {
            let Some(mt) = m[k].interpolate(pos) else {
                continue;
            };
            let r = (m0[s] + c) - (mt + c) * stretch * stretch;
            max_residual[k] = max_residual[k].max(r.abs());
        }
    }
    Ok(TransportResidual {
        times: paths.times.clone(),
        max_residual,
    })
}
