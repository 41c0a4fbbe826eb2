//! Conserved functionals, weighted momenta and local conservation-law
//! residuals.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{weighted_integral, Field, Sign, WeightedIntegral};
use crate::helmholtz::apply_lambda2;
use crate::solver::{rhs_nonlocal, PhysParams, Trajectory};

/// `½∫(u² + u_x²)`.
pub fn energy_h1(u: &Field) -> f64 {
    let ux = first_derivative(u);
    let dens = u.zip_map(&ux, |a, b| a * a + b * b).expect("same grid");
    0.5 * dens.integrate()
}

/// `∫u`.
pub fn mass(u: &Field) -> f64 {
    u.integrate()
}

/// Two readings of the cubic Hamiltonian's gradient term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2Variant {
    /// `∫(u³ + u_x³ + 2ωu² - γu_x²)` as printed.
    AsWritten,
    /// `∫(u³ + u u_x² + 2ωu² - γu_x²)`.
    CubicGradient,
}

impl H2Variant {
    pub const ALL: [H2Variant; 2] = [H2Variant::AsWritten, H2Variant::CubicGradient];

    pub fn name(self) -> &'static str {
        match self {
            H2Variant::AsWritten => "h2_as_written",
            H2Variant::CubicGradient => "h2_cubic_gradient",
        }
    }
}

pub fn hamiltonian_h2(u: &Field, p: &PhysParams, variant: H2Variant) -> f64 {
    let ux = first_derivative(u);
    let (omega, gamma) = (p.omega, p.gamma);
    let dens = u
        .zip_map(&ux, |a, b| {
            let grad = match variant {
                H2Variant::AsWritten => b * b * b,
                H2Variant::CubicGradient => a * b * b,
            };
            a * a * a + grad + 2.0 * omega * a * a - gamma * b * b
        })
        .expect("same grid");
    dens.integrate()
}

/// `∫e^{±x}(m + ω + γ/2)` on a line grid.
pub fn weighted_momentum(u: &Field, p: &PhysParams, sign: Sign) -> Result<WeightedIntegral> {
    let c = p.momentum_shift();
    let m = apply_lambda2(u)?;
    weighted_integral(&m.map(|v| v + c), sign)
}

/// `±∫e^{±x}[(u + ω + γ/2)² + u_x²/2]`, the growth rate of the weighted
/// momentum for solutions whose `u + ω + γ/2` decays.
pub fn weighted_momentum_rate(u: &Field, p: &PhysParams, sign: Sign) -> Result<WeightedIntegral> {
    let c = p.momentum_shift();
    let ux = first_derivative(u);
    let dens = u.zip_map(&ux, |a, b| (a + c) * (a + c) + 0.5 * b * b)?;
    let w = weighted_integral(&dens, sign)?;
    Ok(WeightedIntegral {
        value: sign.value() * w.value,
        warning: w.warning,
    })
}

/// Functionals tracked along trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Energy,
    Mass,
    H2(H2Variant),
    WeightedMomentum(Sign),
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::Energy => "energy_h1".into(),
            Functional::Mass => "mass".into(),
            Functional::H2(v) => v.name().into(),
            Functional::WeightedMomentum(Sign::Plus) => "weighted_momentum_plus".into(),
            Functional::WeightedMomentum(Sign::Minus) => "weighted_momentum_minus".into(),
        }
    }

    pub fn eval(&self, u: &Field, p: &PhysParams) -> Result<f64> {
        Ok(match self {
            Functional::Energy => energy_h1(u),
            Functional::Mass => mass(u),
            Functional::H2(v) => hamiltonian_h2(u, p, *v),
            Functional::WeightedMomentum(s) => weighted_momentum(u, p, *s)?.value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max|F(t) - F(0)| / max(1, |F(0)|)`.
    pub drift: f64,
}

impl FunctionalSeries {
    pub fn from_values(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Self {
        let v0 = values.first().copied().unwrap_or(0.0);
        let scale = v0.abs().max(1.0);
        let drift = values
            .iter()
            .map(|v| (v - v0).abs() / scale)
            .fold(0.0, f64::max);
        Self {
            name: name.into(),
            times,
            values,
            drift,
        }
    }

    /// Per-sample drift `|F(t) - F(0)| / max(1, |F(0)|)`.
    pub fn drifts(&self) -> Vec<f64> {
        let v0 = self.values.first().copied().unwrap_or(0.0);
        let scale = v0.abs().max(1.0);
        self.values.iter().map(|v| (v - v0).abs() / scale).collect()
    }
}

pub fn drift_series(traj: &Trajectory, functional: Functional) -> Result<FunctionalSeries> {
    let p = traj.config.params;
    let values = traj
        .snapshots
        .iter()
        .map(|s| functional.eval(&s.u, &p))
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionalSeries::from_values(functional.name(), traj.times(), values))
}

/// Node-wise residual of a local conservation law together with the net
/// flux through the domain ends (zero on periodic grids).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxCheck {
    pub residual: Field,
    pub boundary_flux: f64,
}

/// `u_t + ∂ₓ(3/2 u² - u u_xx - u_x²/2 - u_tx + 2ωu + γu_xx)` with
/// `u_t = rhs_nonlocal(u)` and `u_tx = ∂ₓ u_t`.
pub fn mass_flux_residual(u: &Field, p: &PhysParams) -> Result<FluxCheck> {
    let d = Derivs::new(u, p)?;
    let flux = Field::new(
        *u.grid(),
        (0..u.len())
            .map(|i| {
                let (v, vx, vxx, vtx) = (d.u[i], d.ux[i], d.uxx[i], d.utx[i]);
                1.5 * v * v - v * vxx - 0.5 * vx * vx - vtx + 2.0 * p.omega * v + p.gamma * vxx
            })
            .collect(),
    )?;
    let residual = &d.ut_field + &flux.derivative(1)?;
    Ok(FluxCheck {
        boundary_flux: end_difference(&flux),
        residual,
    })
}

/// `∂ₜ(u² + u_x²)/2 + ∂ₓ(u³ - u²u_xx - u u_tx - γ/2 u_x² + γ u u_xx + ωu²)`.
pub fn energy_flux_residual(u: &Field, p: &PhysParams) -> Result<FluxCheck> {
    let d = Derivs::new(u, p)?;
    let flux = Field::new(
        *u.grid(),
        (0..u.len())
            .map(|i| {
                let (v, vx, vxx, vtx) = (d.u[i], d.ux[i], d.uxx[i], d.utx[i]);
                v * v * v - v * v * vxx - v * vtx - 0.5 * p.gamma * vx * vx
                    + p.gamma * v * vxx
                    + p.omega * v * v
            })
            .collect(),
    )?;
    let density_rate = Field::new(
        *u.grid(),
        (0..u.len())
            .map(|i| d.u[i] * d.ut_field.values()[i] + d.ux[i] * d.utx[i])
            .collect(),
    )?;
    let residual = &density_rate + &flux.derivative(1)?;
    Ok(FluxCheck {
        boundary_flux: end_difference(&flux),
        residual,
    })
}

struct Derivs {
    u: Vec<f64>,
    ux: Vec<f64>,
    uxx: Vec<f64>,
    ut_field: Field,
    utx: Vec<f64>,
}

impl Derivs {
    fn new(u: &Field, p: &PhysParams) -> Result<Self> {
        let ut = rhs_nonlocal(u, p)?;
        Ok(Self {
            u: u.values().to_vec(),
            ux: u.derivative(1)?.into_values(),
            uxx: u.derivative(2)?.into_values(),
            utx: ut.derivative(1)?.into_values(),
            ut_field: ut,
        })
    }
}

fn end_difference(flux: &Field) -> f64 {
    if flux.grid().is_periodic() {
        0.0
    } else {
        flux.values()[flux.len() - 1] - flux.values()[0]
    }
}

fn first_derivative(u: &Field) -> Field {
    u.derivative(1).expect("order 1 is supported")
}
