//! Scenario documents and their validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use dgh_core::profiles::{velocity_from_momentum, Profile};
use dgh_core::solver::DEFAULT_BLOWUP_GUARD;
use dgh_core::{Field, Grid, GridKind, PhysParams, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FreeRun,
    SupportPropagation,
    TailFormation,
    ContinuationProbe,
    DissipativeEquivalence,
    InvariantAudit,
    ManufacturedConvergence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::FreeRun,
        ExperimentKind::SupportPropagation,
        ExperimentKind::TailFormation,
        ExperimentKind::ContinuationProbe,
        ExperimentKind::DissipativeEquivalence,
        ExperimentKind::InvariantAudit,
        ExperimentKind::ManufacturedConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FreeRun => "free_run",
            ExperimentKind::SupportPropagation => "support_propagation",
            ExperimentKind::TailFormation => "tail_formation",
            ExperimentKind::ContinuationProbe => "continuation_probe",
            ExperimentKind::DissipativeEquivalence => "dissipative_equivalence",
            ExperimentKind::InvariantAudit => "invariant_audit",
            ExperimentKind::ManufacturedConvergence => "manufactured_convergence",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ExperimentKind::FreeRun => "integrate and record functionals, no assertions",
            ExperimentKind::SupportPropagation => "compact momentum support follows the characteristics",
            ExperimentKind::TailFormation => "compact data grow e^{-x} / e^{x} tails at once",
            ExperimentKind::ContinuationProbe => "nonlocal force identity and vanishing-region probes",
            ExperimentKind::DissipativeEquivalence => "damped equation equals a time-changed conservative run",
            ExperimentKind::InvariantAudit => "energy, mass and cubic Hamiltonian drift",
            ExperimentKind::ManufacturedConvergence => "forced exact solution and temporal order",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::FreeRun => {
                "Integrates the initial data to t_end and writes every tracked functional \
                 (energy, mass, both cubic Hamiltonian readings, and on line grids the two \
                 exponentially weighted momenta). A run that trips the gradient guard records \
                 the hitting time as a wave-breaking proxy. Nothing is asserted."
            }
            ExperimentKind::SupportPropagation => {
                "The initial shifted momentum m0 + omega + gamma/2 must be a compact profile on \
                 [a, b]. Stores the characteristics q(t, a) and q(t, b), solving dq/dt = u(t, q) - gamma, \
                 and asserts that at every snapshot the detected support of m + omega + gamma/2 stays \
                 inside [q(t, a), q(t, b)] widened by a few grid cells. Along a characteristic the \
                 shifted momentum is multiplied by the inverse square of the stretch q_x, so it \
                 cannot switch on where it was zero."
            }
            ExperimentKind::TailFormation => {
                "Line grids with omega + gamma/2 = 0. Outside the momentum support the velocity is \
                 an exact multiple of e^{-x} on the right and e^{x} on the left, because u is the \
                 exponential-kernel convolution of a compactly supported momentum. Even compactly \
                 supported u0 therefore loses compact support immediately. Fits log|u| in windows \
                 beyond the characteristic image of the support and asserts the rates are -1 and +1."
            }
            ExperimentKind::ContinuationProbe => {
                "Needs gamma = -2 omega and no damping. At each snapshot evaluates \
                 F = d/dx (1 - d2/dx2)^-1 (u^2 + u_x^2/2) by quadrature and checks \
                 F = -(u_t + (u + 2 omega) u_x). Where u vanishes on an interval, F and its \
                 antiderivative f must vanish too, and because the kernel is positive f = 0 \
                 forces u = 0. This is the mechanism behind unique continuation: a nontrivial \
                 solution cannot vanish on an open space-time rectangle. The vanishing-rectangle \
                 search reports any such region it finds."
            }
            ExperimentKind::DissipativeEquivalence => {
                "Needs gamma = -2 omega and lambda > 0. Runs the damped equation directly, then \
                 runs the conservative equation to tau = (1 - e^{-lambda t})/lambda and maps it \
                 back through u(t, x) = e^{-lambda t} v(tau, x + gamma (t - tau)). Asserts the two \
                 agree snapshot by snapshot."
            }
            ExperimentKind::InvariantAudit => {
                "Tracks energy (1/2) int(u^2 + u_x^2), mass int u and two readings of the cubic \
                 Hamiltonian: one with a u_x^3 gradient term, one with u u_x^2. Without damping it \
                 asserts the energy and mass drift bounds, reruns at half the time step, and \
                 records which cubic reading converges while the other stalls. With damping it \
                 asserts the energy decreases monotonically."
            }
            ExperimentKind::ManufacturedConvergence => {
                "Periodic grids. Adds the source that makes u* = e^{-t} sin(2 pi x) an exact \
                 solution, checks the error at t_end and measures the temporal order over \
                 successive step halvings on a coarse grid."
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    /// Accepts `snake_case` and `CamelCase` spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name().replace('_', "") == key)
            .ok_or_else(|| format!("unknown experiment kind '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ExperimentKind,
    pub grid: GridSpec,
    pub params: ParamSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    pub solver: SolverSpec,
    #[serde(default)]
    pub checks: Checks,
    /// Directory below the output root; defaults to `name`.
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n: usize,
    /// Half-width `L` of a line grid.
    #[serde(default)]
    pub half_width: Option<f64>,
}

/// Either `(omega, gamma, lambda)` directly or the scaled family
/// `(alpha, lambda_tilde, gamma_tilde)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda_tilde: Option<f64>,
    pub gamma_tilde: Option<f64>,
}

/// Initial data given as a velocity profile, or as a profile for the
/// shifted momentum `m0 + ω + γ/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Velocity(Profile),
    Momentum(Profile),
}

impl InitialSpec {
    pub fn profile(&self) -> &Profile {
        match self {
            InitialSpec::Velocity(p) | InitialSpec::Momentum(p) => p,
        }
    }

    /// Initial velocity sampled on `grid`.
    pub fn velocity_on(&self, grid: &Grid, params: &PhysParams) -> dgh_core::Result<Field> {
        match self {
            InitialSpec::Velocity(p) => p.sample(grid),
            InitialSpec::Momentum(p) => velocity_from_momentum(p, grid, params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default = "default_guard")]
    pub blowup_guard: f64,
}

fn one() -> usize {
    1
}

fn default_guard() -> f64 {
    DEFAULT_BLOWUP_GUARD
}

/// Thresholds of the scenario assertions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    pub energy_drift_max: f64,
    pub mass_drift_max: f64,
    pub support_relative: f64,
    pub support_margin_cells: f64,
    pub tail_window_offset: f64,
    pub tail_window_width: f64,
    pub tail_rate_tolerance: f64,
    pub probe_residual_max: f64,
    pub quiet_tol: f64,
    pub quiet_force_max: f64,
    pub rectangle_tol: f64,
    pub equivalence_max: f64,
    pub manufactured_error_max: f64,
    pub order_n: usize,
    pub order_dt: f64,
    pub order_levels: usize,
    pub order_target: f64,
    pub order_tolerance: f64,
    /// Drift below this counts as converged in the cubic Hamiltonian study.
    pub drift_floor: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            energy_drift_max: 1e-6,
            mass_drift_max: 1e-8,
            support_relative: dgh_core::diagnostics::DEFAULT_SUPPORT_RELATIVE,
            support_margin_cells: 3.0,
            tail_window_offset: 3.0,
            tail_window_width: 3.0,
            tail_rate_tolerance: 0.05,
            probe_residual_max: 1e-6,
            quiet_tol: 1e-12,
            quiet_force_max: 1e-8,
            rectangle_tol: 1e-8,
            equivalence_max: 1e-5,
            manufactured_error_max: 1e-6,
            order_n: 32,
            order_dt: 1e-2,
            order_levels: 3,
            order_target: 4.0,
            order_tolerance: 0.2,
            drift_floor: 1e-12,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario document: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] dgh_core::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// A scenario turned into solver inputs.
#[derive(Debug, Clone)]
pub struct Setup {
    pub scenario: Scenario,
    pub grid: Grid,
    pub params: PhysParams,
    pub config: SimConfig,
    /// `None` only for manufactured convergence.
    pub u0: Option<Field>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn output_dir(&self) -> &str {
        self.output_dir.as_deref().unwrap_or(&self.name)
    }

    pub fn setup(&self) -> Result<Setup, ConfigError> {
        if self.name.trim().is_empty() {
            return invalid("name must not be empty");
        }
        let dir = self.output_dir();
        if dir.is_empty() || dir.contains("..") || std::path::Path::new(dir).is_absolute() {
            return invalid(format!("output_dir '{dir}' must be a relative path without '..'"));
        }
        let grid = self.grid.build()?;
        let params = self.params.resolve()?;
        let s = &self.solver;
        let config = SimConfig::new(grid, params, s.dt, s.t_end)?
            .with_stride(s.snapshot_stride)?
            .with_blowup_guard(s.blowup_guard)?;
        self.check_kind(&grid, &params)?;

        let u0 = match (&self.initial, self.kind) {
            (Some(_), ExperimentKind::ManufacturedConvergence) => {
                return invalid("manufactured_convergence starts from the exact solution; drop [initial]")
            }
            (None, ExperimentKind::ManufacturedConvergence) => None,
            (None, _) => return invalid("[initial] is required for this experiment"),
            (Some(init), _) => {
                if matches!(init, InitialSpec::Velocity(_))
                    && !grid.is_periodic()
                    && params.momentum_shift().abs() > 1e-12
                {
                    return invalid("on a line grid omega + gamma/2 must vanish so that u decays");
                }
                Some(init.velocity_on(&grid, &params)?)
            }
        };
        let max_u = u0.as_ref().map_or(1.0, |u| u.max_abs());
        let limit = config.cfl_limit(max_u);
        if config.dt > limit * (1.0 + 1e-12) {
            return invalid(format!("dt = {} exceeds the advisory limit {limit:.4e}", config.dt));
        }
        self.checks.validate()?;
        Ok(Setup {
            scenario: self.clone(),
            grid,
            params,
            config,
            u0,
        })
    }

    fn check_kind(&self, grid: &Grid, p: &PhysParams) -> Result<(), ConfigError> {
        let compact = || {
            self.initial
                .as_ref()
                .and_then(|i| i.profile().support())
                .is_some()
        };
        match self.kind {
            ExperimentKind::SupportPropagation => {
                if !matches!(self.initial, Some(InitialSpec::Momentum(_))) || !compact() {
                    return invalid("support_propagation needs [initial.momentum] with a compact_bump profile");
                }
            }
            ExperimentKind::TailFormation => {
                if grid.is_periodic() {
                    return invalid("tail_formation needs a truncated_line grid");
                }
                if !compact() {
                    return invalid("tail_formation needs compact_bump initial data");
                }
                if p.momentum_shift().abs() > 1e-12 {
                    return invalid("tail_formation needs omega + gamma/2 = 0");
                }
            }
            ExperimentKind::ContinuationProbe => {
                if !p.is_reduced() || p.lambda != 0.0 {
                    return invalid("continuation_probe needs gamma = -2 omega and lambda = 0");
                }
            }
            ExperimentKind::DissipativeEquivalence => {
                if !p.is_reduced() || p.lambda <= 0.0 {
                    return invalid("dissipative_equivalence needs gamma = -2 omega and lambda > 0");
                }
            }
            ExperimentKind::ManufacturedConvergence => {
                if !grid.is_periodic() {
                    return invalid("manufactured_convergence needs a periodic grid");
                }
            }
            ExperimentKind::FreeRun | ExperimentKind::InvariantAudit => {}
        }
        Ok(())
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, ConfigError> {
        match (self.kind, self.half_width) {
            (GridKind::Periodic, Some(_)) => invalid("half_width applies to truncated_line grids only"),
            (GridKind::Periodic, None) => Ok(Grid::periodic(self.n)?),
            (GridKind::TruncatedLine, Some(l)) => Ok(Grid::line(self.n, l)?),
            (GridKind::TruncatedLine, None) => invalid("truncated_line grids need half_width"),
        }
    }
}

impl ParamSpec {
    pub fn resolve(&self) -> Result<PhysParams, ConfigError> {
        let scaled = self.alpha.is_some() || self.lambda_tilde.is_some() || self.gamma_tilde.is_some();
        let direct = self.omega.is_some() || self.gamma.is_some() || self.lambda.is_some();
        match (direct, scaled) {
            (true, true) => invalid("give either omega/gamma/lambda or alpha/lambda_tilde/gamma_tilde, not both"),
            (false, true) => {
                let (Some(alpha), Some(gt)) = (self.alpha, self.gamma_tilde) else {
                    return invalid("scaled parameters need alpha and gamma_tilde");
                };
                Ok(PhysParams::from_scaled(alpha, self.lambda_tilde.unwrap_or(0.0), gt)?)
            }
            _ => {
                let (Some(omega), Some(gamma)) = (self.omega, self.gamma) else {
                    return invalid("params need omega and gamma");
                };
                Ok(PhysParams::new(omega, gamma, self.lambda.unwrap_or(0.0))?)
            }
        }
    }
}

impl Checks {
    fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("energy_drift_max", self.energy_drift_max),
            ("mass_drift_max", self.mass_drift_max),
            ("support_relative", self.support_relative),
            ("tail_window_width", self.tail_window_width),
            ("tail_rate_tolerance", self.tail_rate_tolerance),
            ("probe_residual_max", self.probe_residual_max),
            ("quiet_tol", self.quiet_tol),
            ("quiet_force_max", self.quiet_force_max),
            ("rectangle_tol", self.rectangle_tol),
            ("equivalence_max", self.equivalence_max),
            ("manufactured_error_max", self.manufactured_error_max),
            ("order_dt", self.order_dt),
            ("order_tolerance", self.order_tolerance),
            ("drift_floor", self.drift_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("checks.{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("support_margin_cells", self.support_margin_cells),
            ("tail_window_offset", self.tail_window_offset),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("checks.{name} must be non-negative, got {v}"));
            }
        }
        if self.order_levels < 2 {
            return invalid("checks.order_levels must be at least 2");
        }
        if self.order_n < 16 {
            return invalid("checks.order_n must be at least 16");
        }
        Ok(())
    }
}
