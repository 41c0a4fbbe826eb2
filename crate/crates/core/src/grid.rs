//! Discrete spatial domains and real-valued fields sampled on them.
//!
//! Two domains are supported. A periodic grid samples one period of the unit
//! circle at `x_j = j/n` (the node `x = 1` is identified with `x = 0`). A
//! truncated-line grid covers `[-L, L]` with `n` cells of width `2L/n` and
//! places its nodes at the cell centres, `x_j = -L + (j + ½)h`, so the node
//! set is symmetric about the origin.
//!
//! Periodic derivatives are spectral. Line derivatives use sixth-order
//! centered stencils with one-sided closures near the ends, since a spectral
//! method would impose an artificial periodicity on the truncated line.
//! Quadrature is the composite trapezoid rule (on cell centres this is the
//! midpoint rule), spectrally accurate for smooth periodic data.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::quadrature::fornberg_weights;

pub const MIN_NODES: usize = 16;

/// Outermost line samples must stay below this fraction of `max|f|`.
pub const BOUNDARY_DECAY_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Periodic,
    TruncatedLine,
}

/// Sign of the exponential weight `e^{±x}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    length: f64,
}

impl Grid {
    /// Validated grid. `extent` is the half-width `L` of a line grid and is
    /// ignored for periodic grids, whose period is fixed to 1.
    pub fn new(kind: GridKind, n: usize, extent: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::TooFewNodes { min: MIN_NODES, got: n });
        }
        let length = match kind {
            GridKind::Periodic => 1.0,
            GridKind::TruncatedLine => {
                if !(extent.is_finite() && extent > 0.0) {
                    return Err(Error::BadExtent(extent));
                }
                2.0 * extent
            }
        };
        Ok(Self { kind, n, length })
    }

    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(GridKind::Periodic, n, 1.0)
    }

    pub fn line(n: usize, half_width: f64) -> Result<Self> {
        Self::new(GridKind::TruncatedLine, n, half_width)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == GridKind::Periodic
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Period (periodic) or `2L` (line).
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// `L` for line grids, `½` for the unit circle.
    pub fn half_width(&self) -> f64 {
        0.5 * self.length
    }

    /// Position of node `j`.
    pub fn x(&self, j: usize) -> f64 {
        let h = self.spacing();
        match self.kind {
            GridKind::Periodic => j as f64 * h,
            GridKind::TruncatedLine => -self.half_width() + (j as f64 + 0.5) * h,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// First and last node positions.
    pub fn node_range(&self) -> (f64, f64) {
        (self.x(0), self.x(self.n - 1))
    }

    /// Reduce `x` into the fundamental period `[0, 1)`.
    pub fn wrap(&self, x: f64) -> f64 {
        match self.kind {
            GridKind::Periodic => x - x.floor(),
            GridKind::TruncatedLine => x,
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(*self, self.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(&self) -> Field {
        Field::from_parts(*self, vec![0.0; self.n])
    }

    pub fn constant(&self, c: f64) -> Result<Field> {
        Field::new(*self, vec![c; self.n])
    }
}

/// Validated grid constructor.
pub fn make_grid(kind: GridKind, n: usize, extent: f64) -> Result<Grid> {
    Grid::new(kind, n, extent)
}

/// Soft warning: a line field has not decayed at the truncation boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryWarning {
    pub left: f64,
    pub right: f64,
    pub max: f64,
}

impl fmt::Display for BoundaryWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "field not decayed at line boundary: |f(left)|={:.3e}, |f(right)|={:.3e}, max|f|={:.3e}",
            self.left, self.right, self.max
        )
    }
}

/// Real samples of one function on a grid. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    /// Construction without the finiteness scan; callers that can produce
    /// non-finite values must call [`Field::check_finite`] themselves.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `max_j |self_j - other_j|`.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        Ok(self.zip_map(other, |a, b| a - b)?.max_abs())
    }

    pub fn derivative(&self, order: usize) -> Result<Field> {
        derivative(self, order)
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// Cubic (4-point Lagrange) interpolation. Periodic fields wrap; line
    /// fields return `None` outside the node range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.grid.n();
        let h = self.grid.spacing();
        match self.grid.kind() {
            GridKind::Periodic => {
                let s = self.grid.wrap(x) / h;
                let j = (s.floor() as usize).min(n - 1);
                let t = s - j as f64;
                let idx = |k: isize| (j as isize + k).rem_euclid(n as isize) as usize;
                Some(cubic(
                    [
                        self.values[idx(-1)],
                        self.values[idx(0)],
                        self.values[idx(1)],
                        self.values[idx(2)],
                    ],
                    t + 1.0,
                ))
            }
            GridKind::TruncatedLine => {
                let s = (x - self.grid.x(0)) / h;
                if !(0.0..=(n - 1) as f64).contains(&s) {
                    return None;
                }
                let j = (s.floor() as usize).clamp(1, n - 3);
                let base = j - 1;
                Some(cubic(
                    [
                        self.values[base],
                        self.values[base + 1],
                        self.values[base + 2],
                        self.values[base + 3],
                    ],
                    s - base as f64,
                ))
            }
        }
    }

    /// `Some` when the outermost line samples exceed
    /// [`BOUNDARY_DECAY_RATIO`]` · max|f|`. Periodic fields never warn.
    pub fn boundary_warning(&self) -> Option<BoundaryWarning> {
        if self.grid.is_periodic() {
            return None;
        }
        let n = self.values.len();
        let left = self.values[0].abs().max(self.values[1].abs());
        let right = self.values[n - 1].abs().max(self.values[n - 2].abs());
        let max = self.max_abs();
        let limit = BOUNDARY_DECAY_RATIO * max;
        (max > 0.0 && (left >= limit || right >= limit)).then_some(BoundaryWarning {
            left,
            right,
            max,
        })
    }
}

/// Lagrange cubic through samples at abscissae 0, 1, 2, 3.
fn cubic(v: [f64; 4], s: f64) -> f64 {
    let (a, b, c, d) = (s, s - 1.0, s - 2.0, s - 3.0);
    -v[0] * b * c * d / 6.0 + v[1] * a * c * d / 2.0 - v[2] * a * b * d / 2.0
        + v[3] * a * b * c / 6.0
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Field> for &Field {
            type Output = Field;

            /// Node-wise operation. Panics if the grids differ.
            fn $method(self, rhs: &Field) -> Field {
                assert_eq!(self.grid, rhs.grid, "fields live on different grids");
                Field::from_parts(
                    self.grid,
                    self.values.iter().zip(&rhs.values).map(|(a, b)| a $op b).collect(),
                )
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);

impl Mul<f64> for &Field {
    type Output = Field;

    fn mul(self, rhs: f64) -> Field {
        self.map(|v| v * rhs)
    }
}

impl Neg for &Field {
    type Output = Field;

    fn neg(self) -> Field {
        self.map(|v| -v)
    }
}

/// Spatial derivative of order 1, 2 or 3.
pub fn derivative(f: &Field, order: usize) -> Result<Field> {
    if !(1..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let values = match f.grid.kind() {
        GridKind::Periodic => fourier::derivative(&f.values, order as u32),
        GridKind::TruncatedLine => line_derivative(&f.values, f.grid.spacing(), order),
    };
    Ok(Field::from_parts(f.grid, values))
}

/// Sixth-order (seventh for the centered third derivative) finite
/// differences; windows slide inward at the ends so every stencil stays on
/// the grid.
fn line_derivative(values: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = values.len();
    let width = if order == 3 { 9 } else { 7 };
    let half = width / 2;
    let offsets: Vec<f64> = (0..width).map(|k| k as f64).collect();
    let scale = h.powi(order as i32);
    let weights_at = |centre: usize| -> Vec<f64> {
        fornberg_weights(centre as f64, &offsets, order)
            .into_iter()
            .map(|w| w / scale)
            .collect()
    };
    let interior = weights_at(half);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - width);
            let local;
            let w = if start + half == i {
                &interior
            } else {
                local = weights_at(i - start);
                &local
            };
            w.iter().zip(&values[start..start + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Composite trapezoid rule over the grid.
pub fn integrate(f: &Field) -> f64 {
    f.grid.spacing() * f.values.iter().sum::<f64>()
}

/// `∫ e^{±x} f(x) dx` on a line grid, with a boundary-decay warning when the
/// weighted integrand is not negligible at the truncation points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedIntegral {
    pub value: f64,
    pub warning: Option<BoundaryWarning>,
}

pub fn weighted_integral(f: &Field, sign: Sign) -> Result<WeightedIntegral> {
    if f.grid.is_periodic() {
        return Err(Error::NeedsLine("weighted_integral"));
    }
    let s = sign.value();
    let weighted = Field::from_parts(
        f.grid,
        f.values
            .iter()
            .enumerate()
            .map(|(j, v)| (s * f.grid.x(j)).exp() * v)
            .collect(),
    );
    Ok(WeightedIntegral {
        value: integrate(&weighted),
        warning: weighted.boundary_warning(),
    })
}
