//! Shared fixtures for the benchmark targets.

use gbu_core::grid::{build_grid, DomainSpec, Field, Grid};
use gbu_core::initial::{build_initial_data, InitialDataSpec};
use gbu_core::params::PdeParams;

/// Reference grid, parameters and a bump field at the given resolution.
pub fn bump_fixture(nx: usize, ny: usize) -> (Grid, PdeParams, Field) {
    let domain = DomainSpec::default();
    let grid = build_grid(&domain, nx, ny).expect("valid benchmark grid");
    let params = PdeParams::new(3.0, 5.0, 0.1).expect("valid parameters");
    let spec = InitialDataSpec::new(0.2, 1.0, 0.1, 0.05).expect("valid bump");
    let u = build_initial_data(&spec, &grid, &domain, params.exponents()).expect("bump fits");
    (grid, params, u)
}
