//! The monotone (upwind) rendering of the boundary-layer mechanism on a
//! desk-size grid: a super-slope bump feeds a gradient surge at the bottom
//! boundary, localized at the center column, while the rest of the boundary
//! stays quiet. The surge is resolution-limited and recedes instead of
//! blowing up, so these checks anchor to the surge window rather than a
//! detection time.
//!
//! This run is the honest counterpart of the catastrophe-mediated detection
//! exercised by the acceptance suite: every localization and profile claim is
//! checked here on faithful dynamics.

use gbu_core::diagnostics::{
    bernstein_monitor, bottom_edge_profile, concentration_width, corner_check, k_search,
    off_center_boundary_grad, time_derivative_bound, weighted_profile,
};
use gbu_core::evolution::{run, RunResult, SolverConfig};
use gbu_core::grid::{boundary_distance, build_grid, DomainSpec, Field, Grid};
use gbu_core::initial::{build_initial_data, InitialDataSpec};
use gbu_core::jfunc::JParams;
use gbu_core::ops::HamiltonianScheme;
use gbu_core::params::PdeParams;
use std::sync::OnceLock;

struct Surge {
    grid: Grid,
    params: PdeParams,
    domain: DomainSpec,
    u0: Field,
    res: RunResult,
    /// Time of the peak center-bottom gradient.
    t_peak: f64,
}

static SURGE: OnceLock<Surge> = OnceLock::new();

fn surge() -> &'static Surge {
    SURGE.get_or_init(|| {
        let domain = DomainSpec::default();
        let grid = build_grid(&domain, 61, 101).unwrap();
        let params = PdeParams::new(3.0, 5.0, 0.1).unwrap();
        let spec = InitialDataSpec::new(0.2, 3.0, 0.1, 0.05).unwrap();
        let u0 = build_initial_data(&spec, &grid, &domain, params.exponents()).unwrap();
        let cfg = SolverConfig {
            t_end: 0.016,
            snapshot_every: 0.0005,
            hamiltonian: HamiltonianScheme::Upwind,
            ..SolverConfig::default()
        };
        let res = run(&u0, &grid, &params, &cfg, None).unwrap();
        let c = grid.center_ix();
        let t_peak = res
            .snapshots
            .iter()
            .max_by(|a, b| {
                let pa = bottom_edge_profile(a, &grid)[c];
                let pb = bottom_edge_profile(b, &grid)[c];
                pa.partial_cmp(&pb).unwrap()
            })
            .unwrap()
            .time;
        Surge {
            grid,
            params,
            domain,
            u0,
            res,
            t_peak,
        }
    })
}

#[test]
fn surge_is_centered_and_strong() {
    let s = surge();
    let c = s.grid.center_ix();
    let center0 = bottom_edge_profile(&s.res.snapshots[0], &s.grid)[c];
    assert!((center0 - s.params.mu).abs() < 1e-12, "flat start at mu");
    let mut max_growth = 0.0f64;
    for snap in &s.res.snapshots {
        let prof = bottom_edge_profile(snap, &s.grid);
        max_growth = max_growth.max(prof[c] / center0);
        if snap.time >= 0.002 {
            // argmax of the bottom-edge gradient within one cell of x = 0
            let (mut bi, mut bv) = (0usize, f64::NEG_INFINITY);
            for (i, v) in prof.iter().enumerate() {
                if *v > bv {
                    bv = *v;
                    bi = i;
                }
            }
            assert!(
                (bi as isize - c as isize).abs() <= 1,
                "bottom argmax off center at t = {}: x = {}",
                snap.time,
                s.grid.x(bi)
            );
        }
    }
    assert!(max_growth >= 20.0, "center growth {max_growth:.1}x");
}

#[test]
fn off_center_boundary_stays_quiet() {
    let s = surge();
    let first = &s.res.snapshots[0];
    let off0 = off_center_boundary_grad(first, &s.grid, s.domain.rho);
    let c = s.grid.center_ix();
    let center0 = bottom_edge_profile(first, &s.grid)[c];
    let mut off_growth = 0.0f64;
    let mut center_growth = 0.0f64;
    for snap in &s.res.snapshots {
        off_growth = off_growth.max(off_center_boundary_grad(snap, &s.grid, s.domain.rho) / off0);
        center_growth = center_growth.max(bottom_edge_profile(snap, &s.grid)[c] / center0);
    }
    // the center outgrows the rest of the boundary by a wide margin
    assert!(
        center_growth >= 4.0 * off_growth,
        "contrast too weak: center {center_growth:.1}x vs off-center {off_growth:.1}x"
    );
}

#[test]
fn concentration_width_shrinks_toward_peak() {
    let s = surge();
    let at = |t: f64| s.res.snapshot_nearest(t);
    let w_early = concentration_width(at(s.t_peak / 2.0), &s.grid);
    let w_peak = concentration_width(at(s.t_peak), &s.grid);
    assert!(
        w_peak <= w_early,
        "width should shrink while the surge builds: {w_early} -> {w_peak}"
    );
}

#[test]
fn bernstein_quotient_stays_bounded_through_surge() {
    let s = surge();
    let delta = boundary_distance(&s.grid);
    let at = |t: f64| s.res.snapshot_nearest(t);
    let (mg_half, _) = bernstein_monitor(at(s.t_peak / 2.0), &delta, &s.grid, &s.params);
    let (mg_peak, _) = bernstein_monitor(at(s.t_peak), &delta, &s.grid, &s.params);
    // the weighted quotient moves far less than the raw boundary gradient
    let c = s.grid.center_ix();
    let raw_half = bottom_edge_profile(at(s.t_peak / 2.0), &s.grid)[c];
    let raw_peak = bottom_edge_profile(at(s.t_peak), &s.grid)[c];
    assert!(raw_peak > raw_half, "surge should still be building");
    assert!(
        mg_peak <= 3.0 * mg_half,
        "m_grad ratio {:.2} exceeds 3",
        mg_peak / mg_half
    );
}

#[test]
fn time_derivative_bound_holds_on_surge_run() {
    let s = surge();
    let sec = time_derivative_bound(&s.res, &s.u0, &s.grid, &s.params, HamiltonianScheme::Upwind);
    assert!(
        sec.pass,
        "max |u_t| = {:.3e} vs C1 = {:.3e}",
        sec.max_abs_ut, sec.c_tilde_1
    );
}

#[test]
fn corner_separation_positive_at_surge() {
    let s = surge();
    let snap = s.res.snapshot_nearest(s.t_peak);
    let (value, witness) = corner_check(snap, &s.grid, s.domain.x1, s.domain.y1);
    assert!(
        value > 0.0,
        "corner separation should be positive at t = {}, got {value:.3e} at {witness:?}",
        snap.time
    );
}

#[test]
fn j_sign_holds_on_surge_window() {
    let s = surge();
    let jp = JParams::new(1.0, 1.5, 0.08, s.domain.x1, s.domain.y1, &s.params).unwrap();
    let (k, max_j, tried) = k_search(&s.res, &s.grid, &jp, (s.t_peak / 2.0, s.t_peak), 1e-6);
    assert!(
        k.is_some(),
        "no admissible k after {tried} halvings (max J = {max_j:.3e})"
    );
}

#[test]
fn weighted_profile_bounded_through_surge() {
    let s = surge();
    let jp = JParams::new(1.0, 1.5, 0.08, s.domain.x1, s.domain.y1, &s.params).unwrap();
    let at = |t: f64| s.res.snapshot_nearest(t);
    let half = weighted_profile(at(s.t_peak / 2.0), &s.grid, &jp);
    let peak = weighted_profile(at(s.t_peak), &s.grid, &jp);
    assert!(
        peak <= 3.0 * half.max(1e-12),
        "weighted profile ratio {:.2}",
        peak / half
    );
}
