//! Small quadrature and interpolation kernels used by the grid and the
//! Helmholtz product-integration tables.

use std::f64::consts::PI;
use std::sync::OnceLock;

pub(crate) const GAUSS_POINTS: usize = 16;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub(crate) fn gauss_legendre_unit() -> &'static [(f64, f64); GAUSS_POINTS] {
    static TABLE: OnceLock<[(f64, f64); GAUSS_POINTS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut out = [(0.0, 0.0); GAUSS_POINTS];
        for (i, slot) in out.iter_mut().enumerate() {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            *slot = (0.5 * (1.0 - x), 0.5 * w);
        }
        out
    })
}

/// Lagrange basis polynomials through `nodes`, evaluated at `s`.
pub(crate) fn lagrange_basis<const N: usize>(nodes: &[f64; N], s: f64) -> [f64; N] {
    let mut out = [1.0; N];
    for (j, slot) in out.iter_mut().enumerate() {
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j {
                *slot *= (s - xk) / (nodes[j] - xk);
            }
        }
    }
    out
}

/// Finite-difference weights for the `order`-th derivative at `z` using the
/// sample locations `x` (Fornberg's recursion).
pub(crate) fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}
