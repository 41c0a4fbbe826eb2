//! Thin FFT helpers for periodic grids. Transforms act on one period sampled
//! at `n` equispaced nodes; wavenumbers are integers (period 1).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward transform.
pub(crate) fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_in_place(&mut buf);
    buf
}

pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// Inverse transform including the `1/n` normalization; returns the real part.
pub(crate) fn inverse(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(&mut coeffs);
    let scale = 1.0 / n as f64;
    coeffs.iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber of bin `j`. The Nyquist bin maps to `+n/2`.
#[inline]
pub(crate) fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[inline]
pub(crate) fn is_nyquist(j: usize, n: usize) -> bool {
    n % 2 == 0 && j == n / 2
}

/// `(2πik)^order`, with the Nyquist mode dropped for odd orders.
pub(crate) fn derivative_symbol(j: usize, n: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && is_nyquist(j, n) {
        return Complex64::new(0.0, 0.0);
    }
    let k = 2.0 * PI * wavenumber(j, n) as f64;
    Complex64::new(0.0, k).powu(order)
}

/// Multiply the spectrum of `values` by `symbol(j)` and transform back.
pub(crate) fn apply_symbol(values: &[f64], symbol: impl Fn(usize) -> Complex64) -> Vec<f64> {
    let mut spec = forward(values);
    for (j, c) in spec.iter_mut().enumerate() {
        *c *= symbol(j);
    }
    inverse(spec)
}

pub(crate) fn derivative(values: &[f64], order: u32) -> Vec<f64> {
    let n = values.len();
    apply_symbol(values, |j| derivative_symbol(j, n, order))
}

/// Length of the zero-padded grid used for alias-free quadratic products.
pub(crate) fn padded_len(n: usize) -> usize {
    let m = (3 * n).div_ceil(2);
    m + m % 2
}

/// Embed resolved modes (`|k| < n/2`) of an `n`-point spectrum into an
/// `m`-point spectrum, rescaled so that [`inverse`] returns interpolated
/// samples on the finer grid.
pub(crate) fn pad_spectrum(spec: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = spec.len();
    let scale = m as f64 / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (j, &c) in spec.iter().enumerate() {
        if is_nyquist(j, n) {
            continue;
        }
        let k = wavenumber(j, n);
        out[k.rem_euclid(m as i64) as usize] = c * scale;
    }
    out
}

/// Inverse of [`pad_spectrum`]: keep the modes an `n`-point grid resolves.
pub(crate) fn truncate_spectrum(spec: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = spec.len();
    let scale = n as f64 / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, slot) in out.iter_mut().enumerate() {
        if is_nyquist(j, n) {
            continue;
        }
        let k = wavenumber(j, n);
        *slot = spec[k.rem_euclid(m as i64) as usize] * scale;
    }
    out
}

/// Spectrum of the products `a_i * b_i` computed on the 3/2-padded grid, so
/// that no quadratic aliasing folds back into the resolved modes.
pub(crate) fn dealiased_products(
    factors: &[(&[Complex64], &[Complex64])],
) -> Vec<Vec<Complex64>> {
    let n = factors.first().map_or(0, |(a, _)| a.len());
    let m = padded_len(n);
    factors
        .iter()
        .map(|(a, b)| {
            let fa = inverse(pad_spectrum(a, m));
            let fb = inverse(pad_spectrum(b, m));
            let mut prod: Vec<Complex64> = fa
                .iter()
                .zip(&fb)
                .map(|(x, y)| Complex64::new(x * y, 0.0))
                .collect();
            forward_in_place(&mut prod);
            truncate_spectrum(&prod, n)
        })
        .collect()
}

/// Sample values of the trigonometric interpolant at `x_j + shift`.
pub(crate) fn shift(values: &[f64], shift: f64) -> Vec<f64> {
    let n = values.len();
    apply_symbol(values, |j| {
        let phase = 2.0 * PI * wavenumber(j, n) as f64 * shift;
        if is_nyquist(j, n) {
            Complex64::new(phase.cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, phase)
        }
    })
}
