//! Support detection, exponential tails, the sign kernel `S`, the
//! continuation probe and vanishing-rectangle search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::helmholtz::{HelmholtzKernel, KernelMethod};
use crate::solver::{PhysParams, Trajectory};

/// Relative cutoff used by [`support_interval_relative`] by default.
pub const DEFAULT_SUPPORT_RELATIVE: f64 = 1e-10;

/// Floor below which a tail is treated as absent.
pub const TAIL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    /// `[lo, hi]`, or `None` when no node reaches the threshold.
    pub interval: Option<(f64, f64)>,
    pub threshold: f64,
    pub boundary_touch: bool,
}

/// Smallest node interval containing every node with `|f| ≥ threshold`.
pub fn support_interval(f: &Field, threshold: f64) -> Result<SupportReport> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "support threshold must be positive, got {threshold}"
        )));
    }
    let above = |v: &f64| v.abs() >= threshold;
    let vals = f.values();
    let first = vals.iter().position(above);
    let last = vals.iter().rposition(above);
    let (interval, boundary_touch) = match (first, last) {
        (Some(a), Some(b)) => (
            Some((f.grid().x(a), f.grid().x(b))),
            a == 0 || b == vals.len() - 1,
        ),
        _ => (None, false),
    };
    Ok(SupportReport {
        interval,
        threshold,
        boundary_touch,
    })
}

/// [`support_interval`] with threshold `relative · max|f|`; an identically
/// zero field has empty support.
pub fn support_interval_relative(f: &Field, relative: f64) -> Result<SupportReport> {
    let peak = f.max_abs();
    if peak == 0.0 {
        return Ok(SupportReport {
            interval: None,
            threshold: 0.0,
            boundary_touch: false,
        });
    }
    support_interval(f, relative * peak)
}

/// `S(y) = sgn(a-y) e^{-|a-y|} - sgn(b-y) e^{-|b-y|}`, positive off `[a, b]`.
pub fn sign_kernel_s(a: f64, b: f64, y: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("need a < b, got a={a}, b={b}")));
    }
    let sgn = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    Ok(sgn(a - y) * (-(a - y).abs()).exp() - sgn(b - y) * (-(b - y).abs()).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuietInterval {
    pub lo: f64,
    pub hi: f64,
    pub max_abs_u: f64,
    pub max_abs_big_f: f64,
    pub max_abs_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// `F = ∂ₓΛ⁻²(u² + u_x²/2)`.
    pub big_f: Field,
    /// `f = Λ⁻²(u² + u_x²/2)`.
    pub f: Field,
    /// `max|F + u_t + (u + 2ω) u_x|`.
    pub residual_max: f64,
    /// Node runs (at least two nodes) where `|u| < tol`.
    pub quiet: Vec<QuietInterval>,
}

/// Evaluate `F` and `f` by direct quadrature convolution and compare with
/// `-(u_t + (u + 2ω) u_x)` built from the supplied `u_t`. Requires `γ = -2ω`.
pub fn continuation_probe(u: &Field, ut: &Field, p: &PhysParams, tol: f64) -> Result<ProbeReport> {
    if !p.is_reduced() {
        return Err(Error::Precondition(format!(
            "the continuation identity needs gamma = -2 omega (omega={}, gamma={})",
            p.omega, p.gamma
        )));
    }
    if ut.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *u.grid();
    let ux = u.derivative(1)?;
    let source = u.zip_map(&ux, |a, b| a * a + 0.5 * b * b)?;
    let kernel = HelmholtzKernel::new(grid);
    let big_f = kernel.dx_invert(&source, KernelMethod::DirectConvolution)?;
    let f = kernel.invert(&source, KernelMethod::DirectConvolution)?;
    let residual_max = (0..u.len())
        .map(|i| {
            let (v, d) = (u.values()[i], ux.values()[i]);
            (big_f.values()[i] + ut.values()[i] + (v + 2.0 * p.omega) * d).abs()
        })
        .fold(0.0, f64::max);
    let quiet = quiet_runs(u, tol)
        .into_iter()
        .map(|run| {
            let max_over = |field: &Field| run.nodes(grid.n()).map(|j| field.values()[j].abs()).fold(0.0, f64::max);
            let (lo, hi) = run.extent(&grid);
            QuietInterval {
                lo,
                hi,
                max_abs_u: max_over(u),
                max_abs_big_f: max_over(&big_f),
                max_abs_f: max_over(&f),
            }
        })
        .collect();
    Ok(ProbeReport {
        big_f,
        f,
        residual_max,
        quiet,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub side: Side,
    /// Least-squares slope of `ln|f|`.
    pub rate: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fit `ln|f| ≈ intercept + rate·x` over the nodes in `window`.
///
/// For a tail on the right side the window must lie to the right of the
/// grid centre and vice versa; nodes below [`TAIL_FLOOR`] are skipped.
pub fn tail_decay_fit(f: &Field, side: Side, window: (f64, f64)) -> Result<TailFit> {
    let grid = f.grid();
    let (a, b) = window;
    let (lo, hi) = grid.node_range();
    if !(a < b && a >= lo && b <= hi) {
        return Err(Error::Precondition(format!(
            "window [{a}, {b}] must be a proper interval inside [{lo}, {hi}]"
        )));
    }
    let centre = 0.5 * (lo + hi);
    let on_side = match side {
        Side::Right => a >= centre,
        Side::Left => b <= centre,
    };
    if !on_side {
        return Err(Error::Precondition(format!(
            "window [{a}, {b}] is not on the {side:?} side"
        )));
    }
    let pts: Vec<(f64, f64)> = (0..grid.n())
        .map(|j| (grid.x(j), f.values()[j]))
        .filter(|&(x, v)| x >= a && x <= b && v.abs() >= TAIL_FLOOR)
        .map(|(x, v)| (x, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Precondition(format!(
            "no tail above {TAIL_FLOOR:e} in window [{a}, {b}]"
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let rate = sxy / sxx;
    Ok(TailFit {
        side,
        rate,
        intercept: my - rate * mx,
        points: pts.len(),
    })
}

/// Axis-aligned region of space-time where `|u| < tol` at every node and
/// snapshot it covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

/// Maximal runs per snapshot, intersected greedily across consecutive
/// snapshots. A rectangle spans at least two nodes and two snapshots.
pub fn vanishing_rectangle(traj: &Trajectory, tol: f64) -> Result<Vec<Rectangle>> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let grid = *traj.grid();
    let n = grid.n();
    let runs: Vec<Vec<Run>> = traj.snapshots.iter().map(|s| quiet_runs(&s.u, tol)).collect();
    let times = traj.times();

    // (first snapshot, last snapshot, run)
    let mut found: Vec<(usize, usize, Run)> = Vec::new();
    for (i, start_runs) in runs.iter().enumerate() {
        for &run in start_runs {
            // Skip runs that merely continue a rectangle started earlier.
            if i > 0 && runs[i - 1].iter().any(|r| r.contains(&run, n)) {
                continue;
            }
            let mut cur = run;
            let mut j = i;
            while j + 1 < runs.len() {
                let best = runs[j + 1]
                    .iter()
                    .filter_map(|r| cur.intersect(r, n))
                    .max_by_key(|r| r.len);
                match best {
                    Some(next) => {
                        cur = next;
                        j += 1;
                    }
                    None => break,
                }
            }
            if j > i {
                found.push((i, j, cur));
            }
        }
    }
    let keep: Vec<&(usize, usize, Run)> = found
        .iter()
        .enumerate()
        .filter(|&(k, a)| {
            !found.iter().enumerate().any(|(l, b)| {
                l != k
                    && b.0 <= a.0
                    && a.1 <= b.1
                    && b.2.contains(&a.2, n)
                    && (b.0, b.1, b.2.len) != (a.0, a.1, a.2.len)
            })
        })
        .map(|(_, a)| a)
        .collect();
    Ok(keep
        .into_iter()
        .map(|&(i, j, run)| {
            let (x0, x1) = run.extent(&grid);
            Rectangle {
                t0: times[i],
                t1: times[j],
                x0,
                x1,
            }
        })
        .collect())
}

/// Cyclic (periodic) or plain node run `start .. start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Run {
    start: usize,
    len: usize,
}

impl Run {
    fn nodes(self, n: usize) -> impl Iterator<Item = usize> {
        (0..self.len).map(move |k| (self.start + k) % n)
    }

    fn extent(self, grid: &Grid) -> (f64, f64) {
        let lo = grid.x(self.start);
        (lo, lo + (self.len - 1) as f64 * grid.spacing())
    }

    fn contains(&self, other: &Run, n: usize) -> bool {
        if self.len == n {
            return true;
        }
        let off = (other.start + n - self.start) % n;
        off + other.len <= self.len
    }

    /// Overlap with at least two nodes.
    fn intersect(&self, other: &Run, n: usize) -> Option<Run> {
        if self.len == n {
            return Some(*other).filter(|r| r.len >= 2);
        }
        if other.len == n {
            return Some(*self).filter(|r| r.len >= 2);
        }
        // Runs on a circle can overlap in two pieces; keep the longer.
        let mut best: Option<Run> = None;
        for (a, b) in [(self, other), (other, self)] {
            let off = (b.start + n - a.start) % n;
            if off < a.len {
                let len = (a.len - off).min(b.len);
                let cand = Run {
                    start: b.start,
                    len,
                };
                if best.map_or(true, |r| len > r.len) {
                    best = Some(cand);
                }
            }
        }
        best.filter(|r| r.len >= 2)
    }
}

fn quiet_runs(u: &Field, tol: f64) -> Vec<Run> {
    let n = u.len();
    let quiet: Vec<bool> = u.values().iter().map(|v| v.abs() < tol).collect();
    if quiet.iter().all(|&q| q) {
        return vec![Run { start: 0, len: n }];
    }
    let mut runs = Vec::new();
    let mut j = 0;
    while j < n {
        if quiet[j] {
            let start = j;
            while j < n && quiet[j] {
                j += 1;
            }
            runs.push(Run {
                start,
                len: j - start,
            });
        } else {
            j += 1;
        }
    }
    if u.grid().is_periodic() && runs.len() >= 2 && quiet[0] && quiet[n - 1] {
        let first = runs.remove(0);
        let last = runs.last_mut().expect("at least one run remains");
        last.len += first.len;
    }
    runs.retain(|r| r.len >= 2);
    runs
}
