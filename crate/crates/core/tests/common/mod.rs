//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dgh_core::{Field, Grid};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Adaptive tanh-sinh quadrature, split at the given break points.
pub fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| quadrature::double_exponential::integrate(&f, w[0], w[1], 1e-14).integral)
        .sum()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trigonometric polynomial with modes up to `kmax` and geometric
/// amplitude decay, scaled so `max|u| ≈ amplitude`.
pub fn random_smooth(rng: &mut ChaCha8Rng, grid: &Grid, kmax: usize, amplitude: f64) -> Field {
    let coeffs: Vec<(f64, f64)> = (0..=kmax)
        .map(|k| {
            let decay = 0.6f64.powi(k as i32);
            (rng.gen_range(-1.0..1.0) * decay, rng.gen_range(-1.0..1.0) * decay)
        })
        .collect();
    let raw = grid
        .sample(|x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = 2.0 * PI * k as f64 * x;
                    a * w.cos() + b * w.sin()
                })
                .sum()
        })
        .unwrap();
    let peak = raw.max_abs().max(1e-300);
    raw.map(|v| amplitude * v / peak)
}

/// `cos(2πk x_j)` with the phase reduced exactly in integers, so the samples
/// carry only rounding-level error even for large `k`.
pub fn exact_phase_cosine(grid: &Grid, k: usize) -> Field {
    let n = grid.n();
    Field::new(*grid, (0..n).map(|j| (2.0 * PI * ((k * j) % n) as f64 / n as f64).cos()).collect()).unwrap()
}

pub fn exact_phase_sine(grid: &Grid, k: usize) -> Field {
    let n = grid.n();
    Field::new(*grid, (0..n).map(|j| (2.0 * PI * ((k * j) % n) as f64 / n as f64).sin()).collect()).unwrap()
}

/// Naive O(n²) Fourier multiplier on periodic samples: applies `symbol(k)`
/// to each signed wavenumber `k` and zeroes the Nyquist mode.
pub fn naive_multiplier(f: &[f64], symbol: impl Fn(f64) -> (f64, f64)) -> Vec<f64> {
    let n = f.len();
    let tw = |p: usize| 2.0 * PI * ((p % n) as f64) / n as f64;
    let mut out = vec![0.0; n];
    for k in 0..n {
        if n % 2 == 0 && k == n / 2 {
            continue;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in f.iter().enumerate() {
            let a = tw(k * j);
            re += v * a.cos();
            im -= v * a.sin();
        }
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let (sr, si) = symbol(kk);
        let (re, im) = (re * sr - im * si, re * si + im * sr);
        for (j, o) in out.iter_mut().enumerate() {
            let a = tw(k * j);
            *o += (re * a.cos() - im * a.sin()) / n as f64;
        }
    }
    out
}

pub fn naive_derivative(f: &[f64], order: i32) -> Vec<f64> {
    naive_multiplier(f, |k| {
        let w = 2.0 * PI * k;
        match order.rem_euclid(4) {
            0 => (w.powi(order), 0.0),
            1 => (0.0, w.powi(order)),
            2 => (-w.powi(order), 0.0),
            _ => (0.0, -w.powi(order)),
        }
    })
}

pub fn naive_inverse_helmholtz(f: &[f64]) -> Vec<f64> {
    naive_multiplier(f, |k| (1.0 / (1.0 + 4.0 * PI * PI * k * k), 0.0))
}
