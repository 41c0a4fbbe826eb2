//! The Helmholtz operator `Λ² = 1 - ∂ₓ²`, its inverse `Λ⁻² f = g ∗ f` and the
//! composite `∂ₓΛ⁻²`.
//!
//! Green's kernels:
//!
//! * line: `g(x) = e^{-|x|}/2`;
//! * circle: `g(x) = cosh(x - ⌊x⌋ - ½) / (2 sinh ½)`, used in the two-argument
//!   form `g(x - y)` with `x - y` reduced into `[0, 1)`.
//!
//! Direct convolution integrates the kernel exactly against a local
//! degree-7 interpolant of `f` on every cell (product integration). The
//! kernel's kink at `x = y` always falls on a cell boundary, so the quadrature
//! keeps the interpolant's order instead of dropping to `O(h²)`. On the
//! circle the resulting weights form a circulant operator applied by FFT; on
//! the line the exponential kernel admits an `O(n)` two-sweep recursion. The
//! `*_reference` methods evaluate the same weights as explicit `O(n²)` sums.
//!
//! Line convolutions treat `f` as zero outside the node range. The
//! neglected part is bounded by [`truncation_bound`].

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{Field, Grid, GridKind};
use crate::quadrature::{gauss_legendre_unit, lagrange_basis};

const STENCIL: usize = 8;
/// Interval `[x_k, x_{k+1}]` interpolates through nodes `k-3 ..= k+4`.
const CENTRE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// Divide Fourier coefficient `k` by `1 + 4π²k²` (periodic only).
    SpectralDivision,
    /// Quadrature convolution against the Green's kernel.
    DirectConvolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    kind: GridKind,
    method: KernelMethod,
}

impl KernelSpec {
    pub fn new(kind: GridKind, method: KernelMethod) -> Result<Self> {
        if kind == GridKind::TruncatedLine && method == KernelMethod::SpectralDivision {
            return Err(Error::SpectralOnLine);
        }
        Ok(Self { kind, method })
    }

    /// Spectral division on the circle, direct convolution on the line.
    pub fn default_for(kind: GridKind) -> Self {
        let method = match kind {
            GridKind::Periodic => KernelMethod::SpectralDivision,
            GridKind::TruncatedLine => KernelMethod::DirectConvolution,
        };
        Self { kind, method }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }
}

/// Pointwise Green's kernel.
pub fn green_kernel(kind: GridKind, x: f64) -> f64 {
    match kind {
        GridKind::TruncatedLine => 0.5 * (-x.abs()).exp(),
        GridKind::Periodic => (x - x.floor() - 0.5).cosh() / (2.0 * 0.5f64.sinh()),
    }
}

/// `g'(x)`, with the value 0 at the line kernel's kink.
pub fn green_kernel_derivative(kind: GridKind, x: f64) -> f64 {
    match kind {
        GridKind::TruncatedLine => {
            let s = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            };
            -0.5 * s * (-x.abs()).exp()
        }
        GridKind::Periodic => (x - x.floor() - 0.5).sinh() / (2.0 * 0.5f64.sinh()),
    }
}

/// `Λ²u = u - u_xx`.
pub fn apply_lambda2(u: &Field) -> Result<Field> {
    let uxx = u.derivative(2)?;
    Ok(u - &uxx)
}

/// `Λ⁻² f`.
pub fn invert_lambda2(f: &Field, spec: KernelSpec) -> Result<Field> {
    check_spec(f, spec)?;
    HelmholtzKernel::new(*f.grid()).invert(f, spec.method)
}

/// `∂ₓΛ⁻² f` (note the positive sign).
pub fn dx_invert_lambda2(f: &Field, spec: KernelSpec) -> Result<Field> {
    check_spec(f, spec)?;
    HelmholtzKernel::new(*f.grid()).dx_invert(f, spec.method)
}

fn check_spec(f: &Field, spec: KernelSpec) -> Result<()> {
    if spec.kind != f.grid().kind() {
        return Err(Error::Precondition(format!(
            "kernel for {:?} applied to a {:?} field",
            spec.kind,
            f.grid().kind()
        )));
    }
    Ok(())
}

/// Per-node bound `e^{-(ℓ-|x|)} ‖f‖∞` on the part of `g ∗ f` lost by
/// truncating the line to the node range `[-ℓ, ℓ]`, `ℓ = L - h/2`.
pub fn truncation_bound(f: &Field) -> Result<Vec<f64>> {
    let grid = f.grid();
    if grid.is_periodic() {
        return Err(Error::NeedsLine("truncation_bound"));
    }
    let sup = f.max_abs();
    let l = grid.node_range().1;
    Ok((0..grid.n())
        .map(|j| (-(l - grid.x(j).abs())).exp() * sup)
        .collect())
}

/// Precomputed, immutable convolution tables for one grid.
#[derive(Debug, Clone)]
pub struct HelmholtzKernel {
    grid: Grid,
    tables: Tables,
}

#[derive(Debug, Clone)]
enum Tables {
    Periodic {
        /// Circulant taps: `(g ∗ f)_i = Σ_m taps[(i-m) mod n] f_m`.
        taps: Vec<f64>,
        dx_taps: Vec<f64>,
        taps_hat: Vec<Complex64>,
        dx_taps_hat: Vec<Complex64>,
    },
    Line {
        /// `e^{-h}`.
        decay: f64,
        /// `fwd[p][j] = h∫₀¹ e^{-h(1-s)} ℓ_j(s) ds` for window pattern `p`.
        fwd: [[f64; STENCIL]; STENCIL - 1],
        /// `bwd[p][j] = h∫₀¹ e^{-hs} ℓ_j(s) ds`.
        bwd: [[f64; STENCIL]; STENCIL - 1],
    },
}

impl HelmholtzKernel {
    pub fn new(grid: Grid) -> Self {
        let tables = match grid.kind() {
            GridKind::Periodic => periodic_tables(&grid),
            GridKind::TruncatedLine => line_tables(&grid),
        };
        Self { grid, tables }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn invert(&self, f: &Field, method: KernelMethod) -> Result<Field> {
        self.check(f)?;
        let values = match (&self.tables, method) {
            (_, KernelMethod::SpectralDivision) if !self.grid.is_periodic() => {
                return Err(Error::SpectralOnLine)
            }
            (_, KernelMethod::SpectralDivision) => {
                fourier::apply_symbol(f.values(), |j| spectral_inverse_symbol(j, f.len()))
            }
            (Tables::Periodic { taps_hat, .. }, KernelMethod::DirectConvolution) => {
                circulant_apply(taps_hat, f.values())
            }
            (Tables::Line { .. }, KernelMethod::DirectConvolution) => {
                let (a, b) = self.line_sweeps(f.values());
                a.iter().zip(&b).map(|(a, b)| 0.5 * (a + b)).collect()
            }
        };
        Ok(Field::from_parts(self.grid, values))
    }

    pub fn dx_invert(&self, f: &Field, method: KernelMethod) -> Result<Field> {
        self.check(f)?;
        let values = match (&self.tables, method) {
            (_, KernelMethod::SpectralDivision) if !self.grid.is_periodic() => {
                return Err(Error::SpectralOnLine)
            }
            (_, KernelMethod::SpectralDivision) => {
                let n = f.len();
                fourier::apply_symbol(f.values(), |j| {
                    fourier::derivative_symbol(j, n, 1) * spectral_inverse_symbol(j, n)
                })
            }
            (Tables::Periodic { dx_taps_hat, .. }, KernelMethod::DirectConvolution) => {
                circulant_apply(dx_taps_hat, f.values())
            }
            (Tables::Line { .. }, KernelMethod::DirectConvolution) => {
                let (a, b) = self.line_sweeps(f.values());
                a.iter().zip(&b).map(|(a, b)| 0.5 * (b - a)).collect()
            }
        };
        Ok(Field::from_parts(self.grid, values))
    }

    /// `O(n²)` direct evaluation of the convolution quadrature.
    pub fn invert_reference(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        Ok(Field::from_parts(self.grid, self.reference(f.values(), false)))
    }

    /// `O(n²)` direct evaluation of the derivative quadrature.
    pub fn dx_invert_reference(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        Ok(Field::from_parts(self.grid, self.reference(f.values(), true)))
    }

    fn check(&self, f: &Field) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Left and right exponential sums
    /// `A_i = ∫_{x_0}^{x_i} e^{-(x_i-y)} f`, `B_i = ∫_{x_i}^{x_{n-1}} e^{-(y-x_i)} f`.
    fn line_sweeps(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let Tables::Line { decay, fwd, bwd } = &self.tables else {
            unreachable!("line sweeps on a periodic kernel")
        };
        let n = f.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for k in 0..n - 1 {
            let (start, p) = line_window(k, n);
            let local: f64 = fwd[p].iter().zip(&f[start..start + STENCIL]).map(|(w, v)| w * v).sum();
            a[k + 1] = decay * a[k] + local;
        }
        for k in (0..n - 1).rev() {
            let (start, p) = line_window(k, n);
            let local: f64 = bwd[p].iter().zip(&f[start..start + STENCIL]).map(|(w, v)| w * v).sum();
            b[k] = decay * b[k + 1] + local;
        }
        (a, b)
    }

    fn reference(&self, f: &[f64], derivative: bool) -> Vec<f64> {
        let n = f.len();
        match &self.tables {
            Tables::Periodic { taps, dx_taps, .. } => {
                let t = if derivative { dx_taps } else { taps };
                (0..n)
                    .map(|i| (0..n).map(|m| t[(i + n - m) % n] * f[m]).sum())
                    .collect()
            }
            Tables::Line { fwd, bwd, .. } => {
                let h = self.grid.spacing();
                let cells: Vec<(f64, f64)> = (0..n - 1)
                    .map(|k| {
                        let (start, p) = line_window(k, n);
                        let window = &f[start..start + STENCIL];
                        let dot = |w: &[f64; STENCIL]| -> f64 {
                            w.iter().zip(window).map(|(a, b)| a * b).sum()
                        };
                        (dot(&fwd[p]), dot(&bwd[p]))
                    })
                    .collect();
                (0..n)
                    .map(|i| {
                        let mut left = 0.0;
                        let mut right = 0.0;
                        for (k, &(cf, cb)) in cells.iter().enumerate() {
                            if k < i {
                                left += (-((i - k - 1) as f64) * h).exp() * cf;
                            } else {
                                right += (-((k - i) as f64) * h).exp() * cb;
                            }
                        }
                        if derivative {
                            0.5 * (right - left)
                        } else {
                            0.5 * (left + right)
                        }
                    })
                    .collect()
            }
        }
    }
}

fn spectral_inverse_symbol(j: usize, n: usize) -> Complex64 {
    let k = 2.0 * PI * fourier::wavenumber(j, n) as f64;
    Complex64::new(1.0 / (1.0 + k * k), 0.0)
}

fn circulant_apply(taps_hat: &[Complex64], f: &[f64]) -> Vec<f64> {
    let mut spec = fourier::forward(f);
    for (c, t) in spec.iter_mut().zip(taps_hat) {
        *c *= t;
    }
    fourier::inverse(spec)
}

/// Window start and pattern index for line cell `k`.
fn line_window(k: usize, n: usize) -> (usize, usize) {
    let start = k.saturating_sub(CENTRE).min(n - STENCIL);
    (start, k - start)
}

/// Abscissae (in units of `h`, relative to the cell's left node) of the
/// interpolation nodes for a window whose cell sits at position `p`.
fn window_nodes(p: usize) -> [f64; STENCIL] {
    std::array::from_fn(|j| j as f64 - p as f64)
}

/// `h ∫₀¹ w(s) ℓ_j(s) ds` for the given window pattern.
fn cell_weights(p: usize, h: f64, weight: impl Fn(f64) -> f64) -> [f64; STENCIL] {
    let nodes = window_nodes(p);
    let mut out = [0.0; STENCIL];
    for &(s, w) in gauss_legendre_unit() {
        let basis = lagrange_basis(&nodes, s);
        let ws = h * w * weight(s);
        for (o, b) in out.iter_mut().zip(basis) {
            *o += ws * b;
        }
    }
    out
}

fn line_tables(grid: &Grid) -> Tables {
    let h = grid.spacing();
    let fwd = std::array::from_fn(|p| cell_weights(p, h, |s| (-h * (1.0 - s)).exp()));
    let bwd = std::array::from_fn(|p| cell_weights(p, h, |s| (-h * s).exp()));
    Tables::Line {
        decay: (-h).exp(),
        fwd,
        bwd,
    }
}

fn periodic_tables(grid: &Grid) -> Tables {
    let n = grid.n();
    let h = grid.spacing();
    let circulant = |kernel: fn(GridKind, f64) -> f64| -> Vec<f64> {
        // w[d][j] = h ∫₀¹ g((d - s)h) ℓ_j(s) ds
        let w: Vec<[f64; STENCIL]> = (0..n)
            .map(|d| {
                cell_weights(CENTRE, h, |s| kernel(GridKind::Periodic, (d as f64 - s) * h))
            })
            .collect();
        (0..n)
            .map(|e| {
                (0..STENCIL)
                    .map(|j| w[(e + j + n - CENTRE) % n][j])
                    .sum()
            })
            .collect()
    };
    let taps = circulant(green_kernel);
    let dx_taps = circulant(green_kernel_derivative);
    Tables::Periodic {
        taps_hat: fourier::forward(&taps),
        dx_taps_hat: fourier::forward(&dx_taps),
        taps,
        dx_taps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic(n: usize) -> Grid {
        Grid::periodic(n).unwrap()
    }

    #[test]
    fn kernel_point_values() {
        assert_eq!(green_kernel(GridKind::TruncatedLine, 0.0), 0.5);
        assert!((green_kernel(GridKind::TruncatedLine, 2f64.ln()) - 0.25).abs() < 1e-15);
        let expect = 0.5f64.cosh() / (2.0 * 0.5f64.sinh());
        assert!((green_kernel(GridKind::Periodic, 0.0) - expect).abs() < 1e-15);
        assert!((expect - 1.081_976_706_9).abs() < 1e-9);
        // Two-argument form is 1-periodic and even about ½.
        let g = |x| green_kernel(GridKind::Periodic, x);
        assert!((g(0.3) - g(1.3)).abs() < 1e-14);
        assert!((g(0.3) - g(0.7)).abs() < 1e-14);
        assert!((g(-0.3) - g(0.7)).abs() < 1e-14);
    }

    #[test]
    fn spec_rejects_spectral_on_line() {
        assert_eq!(
            KernelSpec::new(GridKind::TruncatedLine, KernelMethod::SpectralDivision),
            Err(Error::SpectralOnLine)
        );
        let l = Grid::line(64, 5.0).unwrap();
        let k = HelmholtzKernel::new(l);
        assert_eq!(
            k.invert(&l.zeros(), KernelMethod::SpectralDivision),
            Err(Error::SpectralOnLine)
        );
    }

    #[test]
    fn mismatched_spec_kind_is_rejected() {
        let g = periodic(32);
        let spec = KernelSpec::default_for(GridKind::TruncatedLine);
        assert!(matches!(
            invert_lambda2(&g.zeros(), spec),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn apply_lambda2_on_modes() {
        let g = periodic(128);
        let one = g.constant(1.0).unwrap();
        assert!(apply_lambda2(&one).unwrap().max_abs_diff(&one).unwrap() < 1e-13);
        let u = g
            .sample(|x| (2.0 * PI * x).sin() + (4.0 * PI * x).cos())
            .unwrap();
        let m = apply_lambda2(&u).unwrap();
        let expect = g
            .sample(|x| {
                (1.0 + 4.0 * PI * PI) * (2.0 * PI * x).sin()
                    + (1.0 + 16.0 * PI * PI) * (4.0 * PI * x).cos()
            })
            .unwrap();
        assert!(m.max_abs_diff(&expect).unwrap() < 1e-10 * 160.0);
    }

    #[test]
    fn both_periodic_methods_invert_constants_and_modes() {
        let g = periodic(256);
        let k = HelmholtzKernel::new(g);
        let one = g.constant(1.0).unwrap();
        let c = g.sample(|x| (2.0 * PI * x).cos()).unwrap();
        let expect = &c * (1.0 / (1.0 + 4.0 * PI * PI));
        for method in [KernelMethod::SpectralDivision, KernelMethod::DirectConvolution] {
            let inv1 = k.invert(&one, method).unwrap();
            assert!(inv1.max_abs_diff(&one).unwrap() < 1e-12, "{method:?}");
            let invc = k.invert(&c, method).unwrap();
            assert!(invc.max_abs_diff(&expect).unwrap() < 1e-10, "{method:?}");
            assert!(k.dx_invert(&one, method).unwrap().max_abs() < 1e-12);
            let dx = k.dx_invert(&c, method).unwrap();
            let dexpect = g
                .sample(|x| -2.0 * PI * (2.0 * PI * x).sin() / (1.0 + 4.0 * PI * PI))
                .unwrap();
            assert!(dx.max_abs_diff(&dexpect).unwrap() < 1e-10, "{method:?}");
        }
    }

    #[test]
    fn reference_paths_match_fast_paths() {
        let g = periodic(64);
        let k = HelmholtzKernel::new(g);
        let f = g
            .sample(|x| (2.0 * PI * x).sin().exp() + 0.3 * (6.0 * PI * x).cos())
            .unwrap();
        let fast = k.invert(&f, KernelMethod::DirectConvolution).unwrap();
        let slow = k.invert_reference(&f).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-13);
        let fast = k.dx_invert(&f, KernelMethod::DirectConvolution).unwrap();
        let slow = k.dx_invert_reference(&f).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-13);

        let l = Grid::line(300, 12.0).unwrap();
        let k = HelmholtzKernel::new(l);
        let f = l.sample(|x| (-(x - 1.0) * (x - 1.0)).exp() * (1.0 + x)).unwrap();
        let fast = k.invert(&f, KernelMethod::DirectConvolution).unwrap();
        let slow = k.invert_reference(&f).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-13);
        let fast = k.dx_invert(&f, KernelMethod::DirectConvolution).unwrap();
        let slow = k.dx_invert_reference(&f).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-13);
    }

    #[test]
    fn truncation_bound_requires_line_and_grows_toward_edges() {
        assert!(truncation_bound(&periodic(16).zeros()).is_err());
        let l = Grid::line(64, 8.0).unwrap();
        let f = l.constant(2.0).unwrap();
        let b = truncation_bound(&f).unwrap();
        assert!(b[0] > b[32] && b[63] > b[31]);
        assert!((b[32] - 2.0 * (-7.75f64).exp()).abs() < 1e-15);
    }
}
