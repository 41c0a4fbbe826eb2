//! Semidiscrete right-hand sides and RK4 time integration.
//!
//! The conservative equation is stepped in nonlocal form
//!
//! ```text
//! u_t = -(u - γ) u_x - ∂ₓΛ⁻²(u² + u_x²/2 + (2ω + γ) u)
//! ```
//!
//! and the weakly dissipative one adds `-λu`. Periodic grids evaluate the
//! right-hand side pseudospectrally with 3/2-padded products; line grids use
//! the finite-difference derivatives of [`crate::grid`] and the direct
//! exponential convolution of [`crate::helmholtz`].

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{Field, Grid, GridKind};
use crate::helmholtz::{apply_lambda2, HelmholtzKernel, KernelMethod};

/// Default threshold on `max|u_x|` that ends a run as a blow-up event.
pub const DEFAULT_BLOWUP_GUARD: f64 = 1e3;

/// Fraction of the RK4 imaginary-axis stability bound (`2√2/π ≈ 0.90`)
/// used by the advisory time-step check.
pub const CFL_COEFFICIENT: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub omega: f64,
    pub gamma: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl PhysParams {
    pub fn new(omega: f64, gamma: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            omega,
            gamma,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn conservative(omega: f64, gamma: f64) -> Self {
        Self {
            omega,
            gamma,
            lambda: 0.0,
        }
    }

    /// Parameters of the α = 1 equation obtained from the scaled dissipative
    /// family with Helmholtz length `alpha`, damping `lambda_tilde` and
    /// dispersion `gamma_tilde`. Rescaling `x → x/α`, `t → t/α` gives
    /// `λ = λ̃α` and leaves the dispersion coefficient unchanged.
    pub fn from_scaled(alpha: f64, lambda_tilde: f64, gamma_tilde: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        // On u_t - u_txx + γ̃u_x + 3uu_x = ... the DGH coefficients are
        // 2ω = γ̃ and γ = -γ̃.
        Self::new(0.5 * gamma_tilde, -gamma_tilde, lambda_tilde * alpha)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega", self.omega), ("gamma", self.gamma)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `ω + γ/2`, the constant that shifts the momentum in the transport
    /// and support statements.
    pub fn momentum_shift(&self) -> f64 {
        self.omega + 0.5 * self.gamma
    }

    /// True when `γ = -2ω` to within `1e-12` (relative).
    pub fn is_reduced(&self) -> bool {
        (self.gamma + 2.0 * self.omega).abs() <= 1e-12 * (1.0 + self.omega.abs())
    }

    pub fn without_dissipation(&self) -> Self {
        Self {
            lambda: 0.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub grid: Grid,
    pub params: PhysParams,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub blowup_guard: f64,
}

impl SimConfig {
    pub fn new(grid: Grid, params: PhysParams, dt: f64, t_end: f64) -> Result<Self> {
        let c = Self {
            grid,
            params,
            dt,
            t_end,
            snapshot_stride: 1,
            blowup_guard: DEFAULT_BLOWUP_GUARD,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.snapshot_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_blowup_guard(mut self, guard: f64) -> Result<Self> {
        self.blowup_guard = guard;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("blowup_guard", self.blowup_guard)?;
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of RK4 steps; the last step is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Advisory limit `0.9 h / (max|u| + |γ| + 2|ω| + 1)`.
    pub fn cfl_limit(&self, max_u: f64) -> f64 {
        let p = &self.params;
        CFL_COEFFICIENT * self.grid.spacing()
            / (max_u + p.gamma.abs() + 2.0 * p.omega.abs() + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// `max|u_x|` exceeded the guard at `time`.
    BlowupGuard { time: f64 },
    /// A step produced NaN or infinity; `time` is the start of that step.
    NonFinite { time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        &self.config.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory always holds t = 0")
    }

    pub fn t_final(&self) -> f64 {
        self.last().t
    }

    /// Index `i` with `t_i ≤ t ≤ t_{i+1}` and the linear weight of `t_{i+1}`.
    pub fn bracket(&self, t: f64) -> Result<(usize, f64)> {
        let s = &self.snapshots;
        let last = s.len() - 1;
        let slack = 1e-12 * (1.0 + t.abs());
        if !(t >= s[0].t - slack && t <= s[last].t + slack) {
            return Err(Error::OutOfRange(t));
        }
        if last == 0 {
            return Ok((0, 0.0));
        }
        let i = s.partition_point(|snap| snap.t <= t).clamp(1, last) - 1;
        let w = ((t - s[i].t) / (s[i + 1].t - s[i].t)).clamp(0.0, 1.0);
        Ok((i, w))
    }
}

/// Right-hand side evaluator with kernel tables cached for one grid.
#[derive(Debug, Clone)]
pub struct DghRhs {
    grid: Grid,
    params: PhysParams,
    kernel: Option<HelmholtzKernel>,
}

impl DghRhs {
    pub fn new(grid: Grid, params: PhysParams) -> Self {
        let kernel = match grid.kind() {
            GridKind::Periodic => None,
            GridKind::TruncatedLine => Some(HelmholtzKernel::new(grid)),
        };
        Self {
            grid,
            params,
            kernel,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    /// Conservative part.
    pub fn conservative(&self, u: &[f64]) -> Vec<f64> {
        match &self.kernel {
            None => self.periodic(u),
            Some(kernel) => self.line(kernel, u),
        }
    }

    /// Conservative part minus `λu`.
    pub fn dissipative(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.conservative(u);
        let lambda = self.params.lambda;
        for (o, v) in out.iter_mut().zip(u) {
            *o -= lambda * v;
        }
        out
    }

    fn periodic(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let p = &self.params;
        let u_hat = fourier::forward(u);
        let ux_hat: Vec<Complex64> = u_hat
            .iter()
            .enumerate()
            .map(|(j, c)| c * fourier::derivative_symbol(j, n, 1))
            .collect();
        let prods = fourier::dealiased_products(&[
            (&u_hat, &ux_hat),
            (&u_hat, &u_hat),
            (&ux_hat, &ux_hat),
        ]);
        let linear = 2.0 * p.omega + p.gamma;
        let out: Vec<Complex64> = (0..n)
            .map(|j| {
                if fourier::is_nyquist(j, n) {
                    return Complex64::new(0.0, 0.0);
                }
                let k = 2.0 * PI * fourier::wavenumber(j, n) as f64;
                let dx_inv = Complex64::new(0.0, k / (1.0 + k * k));
                let source = prods[1][j] + 0.5 * prods[2][j] + linear * u_hat[j];
                -(prods[0][j] - p.gamma * ux_hat[j]) - dx_inv * source
            })
            .collect();
        fourier::inverse(out)
    }

    fn line(&self, kernel: &HelmholtzKernel, u: &[f64]) -> Vec<f64> {
        let p = &self.params;
        let field = Field::from_parts(self.grid, u.to_vec());
        let ux = field.derivative(1).expect("order 1 is supported");
        let linear = 2.0 * p.omega + p.gamma;
        let source: Vec<f64> = u
            .iter()
            .zip(ux.values())
            .map(|(v, d)| v * v + 0.5 * d * d + linear * v)
            .collect();
        let nonlocal = kernel
            .dx_invert(
                &Field::from_parts(self.grid, source),
                KernelMethod::DirectConvolution,
            )
            .expect("kernel built for this grid");
        u.iter()
            .zip(ux.values())
            .zip(nonlocal.values())
            .map(|((v, d), f)| -(v - p.gamma) * d - f)
            .collect()
    }
}

/// Conservative nonlocal right-hand side; `p.lambda` is ignored.
pub fn rhs_nonlocal(u: &Field, p: &PhysParams) -> Result<Field> {
    rhs_nonlocal_with_momentum(u, p).map(|(ut, _)| ut)
}

/// `(u_t, m)` with `m = Λ²u`.
pub fn rhs_nonlocal_with_momentum(u: &Field, p: &PhysParams) -> Result<(Field, Field)> {
    u.check_finite()?;
    let rhs = DghRhs::new(*u.grid(), *p);
    let ut = Field::new(*u.grid(), rhs.conservative(u.values()))?;
    let m = apply_lambda2(u)?;
    m.check_finite()?;
    Ok((ut, m))
}

/// `rhs_nonlocal(u) - λu`.
pub fn rhs_dissipative(u: &Field, p: &PhysParams) -> Result<Field> {
    p.validate()?;
    u.check_finite()?;
    Field::new(*u.grid(), DghRhs::new(*u.grid(), *p).dissipative(u.values()))
}

/// One classical RK4 step for `u_t = rhs(t, u)`.
pub fn step_rk4<F>(u: &Field, t: f64, dt: f64, mut rhs: F) -> Result<Field>
where
    F: FnMut(f64, &Field) -> Result<Field>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let grid = *u.grid();
    let mut f = |t: f64, v: &[f64]| -> Result<Vec<f64>> {
        rhs(t, &Field::from_parts(grid, v.to_vec())).map(Field::into_values)
    };
    let next = rk4_raw(u.values(), t, dt, |t, v| f(t, v))?;
    Field::new(grid, next)
}

fn rk4_raw<F>(u: &[f64], t: f64, dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };
    let k1 = f(t, u)?;
    let k2 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &axpy(0.5 * dt, &k2))?;
    let k4 = f(t + dt, &axpy(dt, &k3))?;
    Ok((0..u.len())
        .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect())
}

/// Space-time source term added to the right-hand side.
pub trait Forcing {
    fn eval(&self, t: f64, grid: &Grid) -> Vec<f64>;
}

impl<F> Forcing for F
where
    F: Fn(f64, &Grid) -> Vec<f64>,
{
    fn eval(&self, t: f64, grid: &Grid) -> Vec<f64> {
        self(t, grid)
    }
}

/// A closed-form field `u*(t, x)` together with its time derivative.
pub trait ExactSolution {
    fn value(&self, t: f64, x: f64) -> f64;
    fn time_derivative(&self, t: f64, x: f64) -> f64;
}

/// `u* = A e^{-rt} sin(2πkx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayingSine {
    pub amplitude: f64,
    pub rate: f64,
    pub wavenumber: f64,
}

impl Default for DecayingSine {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            rate: 1.0,
            wavenumber: 1.0,
        }
    }
}

impl ExactSolution for DecayingSine {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.amplitude * (-self.rate * t).exp() * (2.0 * PI * self.wavenumber * x).sin()
    }

    fn time_derivative(&self, t: f64, x: f64) -> f64 {
        -self.rate * self.value(t, x)
    }
}

/// `u* ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantState(pub f64);

impl ExactSolution for ConstantState {
    fn value(&self, _t: f64, _x: f64) -> f64 {
        self.0
    }

    fn time_derivative(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
}

/// Source `∂ₜu* - rhs(u*)` that makes `u*` an exact solution of the forced
/// equation (dissipation included when `p.lambda > 0`).
pub struct ManufacturedForcing<E> {
    exact: E,
    params: PhysParams,
}

pub fn manufactured_forcing<E: ExactSolution>(exact: E, p: PhysParams) -> ManufacturedForcing<E> {
    ManufacturedForcing { exact, params: p }
}

impl<E: ExactSolution> ManufacturedForcing<E> {
    pub fn exact(&self) -> &E {
        &self.exact
    }

    pub fn exact_field(&self, t: f64, grid: &Grid) -> Result<Field> {
        grid.sample(|x| self.exact.value(t, x))
    }
}

impl<E: ExactSolution> Forcing for ManufacturedForcing<E> {
    fn eval(&self, t: f64, grid: &Grid) -> Vec<f64> {
        let u: Vec<f64> = grid.nodes().iter().map(|&x| self.exact.value(t, x)).collect();
        let rhs = DghRhs::new(*grid, self.params).dissipative(&u);
        grid.nodes()
            .iter()
            .zip(rhs)
            .map(|(&x, r)| self.exact.time_derivative(t, x) - r)
            .collect()
    }
}

/// Integrate `u_t = rhs_dissipative(u) + forcing(t)` from `u0`.
pub fn simulate(config: &SimConfig, u0: &Field, forcing: Option<&dyn Forcing>) -> Result<Trajectory> {
    let rhs = DghRhs::new(config.grid, config.params);
    simulate_with(config, u0, |t, u| {
        let mut out = rhs.dissipative(u);
        if let Some(f) = forcing {
            for (o, s) in out.iter_mut().zip(f.eval(t, &config.grid)) {
                *o += s;
            }
        }
        out
    })
}

/// Integrate `u_t = rhs(t, u)` with the stepping, snapshot, CFL and guard
/// logic of [`simulate`].
pub fn simulate_with<F>(config: &SimConfig, u0: &Field, mut rhs: F) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    config.validate()?;
    if *u0.grid() != config.grid {
        return Err(Error::GridMismatch);
    }
    u0.check_finite()?;
    let limit = config.cfl_limit(u0.max_abs());
    if config.dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation {
            dt: config.dt,
            limit,
        });
    }

    let mut warnings = Vec::new();
    if !config.grid.is_periodic() {
        let speed = u0.max_abs() + config.params.gamma.abs();
        if config.t_end * speed >= config.grid.half_width() / 4.0 {
            warnings.push(format!(
                "t_end·(max|u0|+|γ|) = {:.3} is not below L/4 = {:.3}; signals may reach the boundary",
                config.t_end * speed,
                config.grid.half_width() / 4.0
            ));
        }
        if let Some(w) = u0.boundary_warning() {
            warnings.push(format!("initial data: {w}"));
        }
    }

    let steps = config.steps();
    let dt = config.t_end / steps as f64;
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        u: u0.clone(),
    }];
    let mut u = u0.values().to_vec();
    let mut termination = Termination::Completed;

    if max_gradient(&config.grid, &u) > config.blowup_guard {
        termination = Termination::BlowupGuard { time: 0.0 };
    } else {
        for step in 0..steps {
            let t = step as f64 * dt;
            let next = rk4_raw(&u, t, dt, |t, v| Ok(rhs(t, v)))?;
            if next.iter().any(|v| !v.is_finite()) {
                termination = Termination::NonFinite { time: t };
                break;
            }
            u = next;
            let t_next = if step + 1 == steps {
                config.t_end
            } else {
                (step + 1) as f64 * dt
            };
            let blown = max_gradient(&config.grid, &u) > config.blowup_guard;
            if blown || (step + 1) % config.snapshot_stride == 0 || step + 1 == steps {
                snapshots.push(Snapshot {
                    t: t_next,
                    u: Field::from_parts(config.grid, u.clone()),
                });
            }
            if blown {
                termination = Termination::BlowupGuard { time: t_next };
                break;
            }
        }
    }

    if !config.grid.is_periodic() {
        if let Some(w) = snapshots.last().and_then(|s| s.u.boundary_warning()) {
            warnings.push(format!("final state: {w}"));
        }
    }

    Ok(Trajectory {
        config: config.clone(),
        snapshots,
        termination,
        warnings,
    })
}

fn max_gradient(grid: &Grid, u: &[f64]) -> f64 {
    Field::from_parts(*grid, u.to_vec())
        .derivative(1)
        .map(|d| d.max_abs())
        .unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysParams {
        PhysParams::conservative(0.1, -0.2)
    }

    #[test]
    fn params_validation() {
        assert!(PhysParams::new(0.0, 0.0, -1.0).is_err());
        assert!(PhysParams::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(PhysParams::new(1.0, -2.0, 0.5).unwrap().is_reduced());
        assert!(!params().with_gamma(0.3).is_reduced());
        let p = PhysParams::from_scaled(2.0, 0.25, 0.4).unwrap();
        assert_eq!(p.lambda, 0.5);
        assert!(p.is_reduced());
    }

    impl PhysParams {
        fn with_gamma(mut self, g: f64) -> Self {
            self.gamma = g;
            self
        }
    }

    #[test]
    fn config_validation_and_steps() {
        let g = Grid::periodic(64).unwrap();
        assert!(SimConfig::new(g, params(), 0.0, 1.0).is_err());
        assert!(SimConfig::new(g, params(), 1e-3, -1.0).is_err());
        let c = SimConfig::new(g, params(), 1e-3, 1.0).unwrap();
        assert_eq!(c.steps(), 1000);
        assert!(c.clone().with_stride(0).is_err());
        assert!(c.with_blowup_guard(0.0).is_err());
        let c = SimConfig::new(g, params(), 0.3, 1.0).unwrap();
        assert_eq!(c.steps(), 4);
    }

    #[test]
    fn zero_and_constant_states_are_fixed() {
        let g = Grid::periodic(64).unwrap();
        let p = PhysParams::new(0.7, 1.3, 0.0).unwrap();
        assert_eq!(rhs_nonlocal(&g.zeros(), &p).unwrap().max_abs(), 0.0);
        let c = g.constant(0.4).unwrap();
        assert!(rhs_nonlocal(&c, &p).unwrap().max_abs() < 1e-14);
        let l = Grid::line(128, 10.0).unwrap();
        assert_eq!(rhs_nonlocal(&l.zeros(), &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dissipative_adds_linear_damping() {
        let g = Grid::periodic(128).unwrap();
        let u = g.sample(|x| 0.1 * (2.0 * PI * x).sin()).unwrap();
        let p = PhysParams::new(1.0, -2.0, 0.0).unwrap();
        assert_eq!(rhs_dissipative(&u, &p).unwrap(), rhs_nonlocal(&u, &p).unwrap());
        let pd = PhysParams::new(1.0, -2.0, 0.5).unwrap();
        let diff = &rhs_dissipative(&u, &pd).unwrap() - &rhs_nonlocal(&u, &p).unwrap();
        let expect = u.map(|v| -0.5 * v);
        assert!(diff.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn rk4_fixed_points() {
        let g = Grid::periodic(32).unwrap();
        let p = params();
        let step = |u: &Field| step_rk4(u, 0.0, 1e-2, |_, v| rhs_nonlocal(v, &p)).unwrap();
        assert_eq!(step(&g.zeros()).max_abs(), 0.0);
        let c = g.constant(0.3).unwrap();
        assert!(step(&c).max_abs_diff(&c).unwrap() < 1e-15);
        assert!(step_rk4(&c, 0.0, -1.0, |_, v| Ok(v.clone())).is_err());
    }

    #[test]
    fn cfl_rejected_up_front() {
        let g = Grid::periodic(512).unwrap();
        let c = SimConfig::new(g, params(), 1e-2, 1.0).unwrap();
        assert!(matches!(
            simulate(&c, &g.zeros(), None),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn zero_data_run_completes_with_zero_snapshots() {
        let g = Grid::periodic(64).unwrap();
        let c = SimConfig::new(g, params(), 1e-2, 0.5).unwrap().with_stride(10).unwrap();
        let traj = simulate(&c, &g.zeros(), None).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        assert_eq!(traj.times().len(), 6);
        assert!((traj.t_final() - 0.5).abs() < 1e-15);
        assert!(traj.snapshots.iter().all(|s| s.u.max_abs() == 0.0));
    }

    #[test]
    fn non_finite_rhs_truncates_the_run() {
        let g = Grid::periodic(16).unwrap();
        let c = SimConfig::new(g, params(), 1e-2, 0.1).unwrap();
        let mut calls = 0;
        let traj = simulate_with(&c, &g.zeros(), |_, u| {
            calls += 1;
            let bad = if calls > 8 { f64::NAN } else { 0.0 };
            vec![bad; u.len()]
        })
        .unwrap();
        assert_eq!(traj.termination, Termination::NonFinite { time: 0.02 });
        assert_eq!(traj.snapshots.len(), 3);
    }

    #[test]
    fn guard_stops_run() {
        let g = Grid::periodic(64).unwrap();
        let c = SimConfig::new(g, params(), 1e-3, 0.1)
            .unwrap()
            .with_blowup_guard(1.0)
            .unwrap();
        let u0 = g.sample(|x| 0.1 * (2.0 * PI * x).sin()).unwrap();
        let traj = simulate_with(&c, &u0, |_, u| u.iter().map(|v| 20.0 * v).collect()).unwrap();
        match traj.termination {
            Termination::BlowupGuard { time } => {
                assert!((time - traj.t_final()).abs() < 1e-15 && time > 0.0)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bracket_locates_times() {
        let g = Grid::periodic(16).unwrap();
        let c = SimConfig::new(g, params(), 0.02, 0.1).unwrap();
        let traj = simulate(&c, &g.zeros(), None).unwrap();
        assert_eq!(traj.bracket(0.0).unwrap(), (0, 0.0));
        let (i, w) = traj.bracket(0.05).unwrap();
        assert_eq!(i, 2);
        assert!((w - 0.5).abs() < 1e-12);
        assert_eq!(traj.bracket(0.1).unwrap(), (4, 1.0));
        assert!(traj.bracket(0.12).is_err());
    }

    #[test]
    fn forcing_of_constant_is_zero() {
        let g = Grid::periodic(32).unwrap();
        let f = manufactured_forcing(ConstantState(0.7), params());
        assert!(f.eval(0.3, &g).iter().all(|v| v.abs() < 1e-14));
        let f = manufactured_forcing(ConstantState(0.0), params());
        assert!(f.eval(0.3, &g).iter().all(|v| *v == 0.0));
        let f = manufactured_forcing(DecayingSine::default(), params());
        assert!(f.eval(0.0, &g).iter().any(|v| v.abs() > 1e-3));
    }
}
