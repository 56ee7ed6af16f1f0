//! Simulation and verification laboratory for boundary gradient blow-up in
//! the quasilinear flow
//!
//! ```text
//! u_t = div(|grad u|^{p-2} grad u) + |grad u|^q,   q > p > 2,
//! ```
//!
//! on a symmetric rectangle with Dirichlet data `u = mu * y`. The crate builds
//! well-prepared bump initial data, integrates the flow explicitly with
//! CFL-limited steps until the gradient blows up at the bottom boundary,
//! verifies stationary and moving comparison barriers, and evaluates the
//! localization, profile and sign diagnostics that characterize single-point
//! gradient blow-up at the origin.

pub mod barriers;
pub mod calibrate;
pub mod config;
pub mod diagnostics;
pub mod evolution;
pub mod grid;
pub mod initial;
pub mod jfunc;
pub mod ops;
pub mod output;
pub mod params;

pub use config::{parse_config, parse_config_str, RunSpec};
pub use evolution::{run, RunResult, RunStatus, SolverConfig};
pub use grid::{boundary_distance, build_grid, DomainSpec, Field, Grid};
pub use initial::{build_initial_data, validate_initial_data, InitialDataSpec};
pub use jfunc::JParams;
pub use ops::{gradient, hamiltonian, p_laplacian, rhs, HamiltonianScheme};
pub use params::{validate_params, PdeParams, ScalingExponents};
