//! Numerical laboratory for the Dullin-Gottwald-Holm (DGH) shallow-water
//! equation
//!
//! ```text
//! u_t - u_txx + 2ω u_x + 3 u u_x + γ u_xxx = 2 u_x u_xx + u u_xxx
//! ```
//!
//! in its nonlocal form `u_t = -(u-γ) u_x - ∂ₓΛ⁻²(u² + u_x²/2 + (2ω+γ) u)`,
//! on the unit circle and on a truncated real line.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`]: domains, fields, differentiation and quadrature.
//! * [`helmholtz`]: `Λ² = 1 - ∂ₓ²`, its Green's-function inverse and `∂ₓΛ⁻²`.
//! * [`solver`]: semidiscrete right-hand sides and RK4 trajectories.
//! * [`characteristics`]: particle paths `dq/dt = u(t,q) - γ` and the
//!   momentum transport identity along them.
//! * [`invariants`]: energy, mass, the cubic Hamiltonian and weighted momenta.
//! * [`diagnostics`]: support detection, exponential-tail fits, the
//!   continuation probe and vanishing-rectangle search.
//! * [`dissipative`]: the exponential time change mapping the weakly
//!   dissipative equation onto the conservative one.
//! * [`profiles`]: initial-data families shared by tests and the CLI.

pub mod characteristics;
pub mod diagnostics;
pub mod dissipative;
mod error;
mod fourier;
pub mod grid;
pub mod helmholtz;
pub mod invariants;
pub mod profiles;
mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{make_grid, Field, Grid, GridKind, Sign};
pub use solver::{PhysParams, SimConfig, Termination, Trajectory};
