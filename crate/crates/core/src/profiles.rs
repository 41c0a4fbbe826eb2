//! Named families of initial data.

use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::helmholtz::{invert_lambda2, KernelSpec};
use crate::solver::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `A exp(-((x - c)/w)²)`.
    Gaussian {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// `A cos(2πk x)`.
    Cosine {
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
    },
    /// `A e · exp(-1/(1 - s²))` for `s = (x - c)/r` inside `(-1, 1)`, zero
    /// outside; peak value `A`, support `[c - r, c + r]`.
    CompactBump {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        half_width: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let finite = |v: f64| v.is_finite();
        match *self {
            Profile::Zero => Ok(()),
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(finite(amplitude) && finite(center) && finite(width) && width > 0.0) {
                    return bad("gaussian needs finite amplitude/center and positive width");
                }
                Ok(())
            }
            Profile::Cosine {
                amplitude,
                wavenumber,
            } => {
                if !(finite(amplitude) && finite(wavenumber)) {
                    return bad("cosine needs finite amplitude and wavenumber");
                }
                Ok(())
            }
            Profile::CompactBump {
                amplitude,
                center,
                half_width,
            } => {
                if !(finite(amplitude) && finite(center) && finite(half_width) && half_width > 0.0) {
                    return bad("compact bump needs finite amplitude/center and positive half_width");
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            }
            Profile::Cosine {
                amplitude,
                wavenumber,
            } => amplitude * (2.0 * PI * wavenumber * x).cos(),
            Profile::CompactBump {
                amplitude,
                center,
                half_width,
            } => amplitude * bump((x - center) / half_width),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        self.validate()?;
        grid.sample(|x| self.eval(x))
    }

    /// Support of the profile when it is compact.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::CompactBump {
                center, half_width, ..
            } => Some((center - half_width, center + half_width)),
            _ => None,
        }
    }
}

/// Unit-peak smooth bump `e · exp(-1/(1 - s²))` on `(-1, 1)`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        E * (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Initial velocity whose shifted momentum `m₀ + ω + γ/2` equals the
/// profile: `u₀ = Λ⁻²(profile) - (ω + γ/2)`.
///
/// On a line grid the result must decay, so `ω + γ/2` has to vanish.
pub fn velocity_from_momentum(profile: &Profile, grid: &Grid, p: &PhysParams) -> Result<Field> {
    let c = p.momentum_shift();
    if !grid.is_periodic() && c.abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "on a line grid omega + gamma/2 must vanish, got {c}"
        )));
    }
    let target = profile.sample(grid)?;
    let u = invert_lambda2(&target, KernelSpec::default_for(grid.kind()))?;
    Ok(u.map(|v| v - c))
}
