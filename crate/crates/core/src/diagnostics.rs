//! Post-processing of a completed run: symmetry and monotonicity, the time
//! derivative bound, the boundary-distance gradient profile, blow-up
//! localization, the sign of the J-functional, the weighted profile bound and
//! the corner product bound.
//!
//! Every section is a deterministic function of the run result; failures carry
//! witnesses. Claims stated on the window `(T/2, T)` are evaluated on
//! `(f * T_num, T_num)` with `T_num` the numerical blow-up proxy time and
//! `f = 0.5` by default (sensitivity over `f in {0.4, 0.5, 0.6}` is reported
//! alongside).

use crate::evolution::{RunResult, RunStatus};
use crate::grid::{boundary_distance, DomainSpec, Field, Grid};
use crate::jfunc::{evaluate_j, JParams};
use crate::ops::{gradient, rhs, HamiltonianScheme};
use crate::params::PdeParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("diagnostics require mu > 0 (degenerate boundary slope)")]
    DegenerateMu,
    #[error("diagnostics require a GradientBlowUp run, got {0:?}")]
    NotABlowUpRun(RunStatus),
    #[error("not enough snapshots in the window ({0})")]
    TooFewSnapshots(usize),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SymmetrySection {
    /// don3: mirror symmetry defect.
    pub max_defect: f64,
    /// don4: max u_x over the right half (center band excluded).
    pub max_ux_right_half: f64,
    /// don1: min u_y against the floor mu/2.
    pub min_uy: f64,
    pub uy_floor: f64,
    pub pass_symmetry: bool,
    pub pass_ux: bool,
    pub pass_uy: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Don3Section {
    pub max_defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Don4Section {
    pub max_ux_right_half: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Don1Section {
    pub min_uy: f64,
    pub floor: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtBoundSection {
    /// Discrete `||Delta_p u0 + |grad u0|^q||_inf`.
    pub c_tilde_1: f64,
    pub max_abs_ut: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinSection {
    pub m_grad_half: f64,
    pub m_grad_final: f64,
    pub m_u_half: f64,
    pub m_u_final: f64,
    pub grad_growth_window: f64,
    pub pass_grad_ratio: bool,
    pub pass_u_ratio: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationSection {
    /// Fraction of late snapshots whose bottom argmax is within one cell of x = 0.
    pub argmax_at_center_fraction: f64,
    pub center_growth: f64,
    pub off_center_growth: f64,
    pub width_half: f64,
    pub width_final: f64,
    pub pass_argmax: bool,
    pub pass_off_center: bool,
    pub pass_width: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JSignSection {
    pub k_found: Option<f64>,
    pub max_j_at_k: f64,
    pub inconclusive: bool,
    pub tried: usize,
    pub window: (f64, f64),
    /// `(window start fraction, k found, max J)` over {0.4, 0.5, 0.6}.
    pub sensitivity: Vec<(f64, Option<f64>, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CornerSection {
    pub value: f64,
    pub witness_xy: (f64, f64),
    pub snapshot_time: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedProfileSection {
    pub half: f64,
    pub final_: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Full per-claim report. Serialized section names follow the run-output
/// schema: don1, don3, don4, ut_bound, bernstein, localization, J_sign,
/// corner, weighted_profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub status: RunStatus,
    pub t_num: f64,
    pub window: (f64, f64),
    #[serde(skip)]
    pub symmetry: SymmetrySection,
    pub don3: Don3Section,
    pub don4: Don4Section,
    pub don1: Don1Section,
    #[serde(rename = "ut_bound")]
    pub ut_bound: UtBoundSection,
    pub bernstein: BernsteinSection,
    pub localization: Option<LocalizationSection>,
    #[serde(rename = "J_sign")]
    pub j_sign: Option<JSignSection>,
    pub corner: Option<CornerSection>,
    pub weighted_profile: Option<WeightedProfileSection>,
}

impl DiagnosticsReport {
    pub fn all_pass(&self) -> bool {
        let s = &self.symmetry;
        let mut ok = s.pass_symmetry && s.pass_ux && s.pass_uy && self.ut_bound.pass;
        ok &= self.bernstein.pass_grad_ratio && self.bernstein.pass_u_ratio;
        if let Some(l) = &self.localization {
            ok &= l.pass_argmax && l.pass_off_center && l.pass_width;
        }
        if let Some(j) = &self.j_sign {
            ok &= j.pass;
        }
        if let Some(c) = &self.corner {
            ok &= c.pass;
        }
        if let Some(w) = &self.weighted_profile {
            ok &= w.pass;
        }
        ok
    }
}

/// Symmetry, x-monotonicity and the u_y floor, from the per-step series.
pub fn check_symmetry_monotonicity(run: &RunResult, mu: f64) -> SymmetrySection {
    let mut max_defect = 0.0f64;
    let mut max_ux = f64::NEG_INFINITY;
    let mut min_uy = f64::INFINITY;
    for row in &run.series {
        max_defect = max_defect.max(row.symmetry_defect);
        max_ux = max_ux.max(row.max_ux_right_half);
        min_uy = min_uy.min(row.min_uy);
    }
    let floor = mu / 2.0;
    SymmetrySection {
        max_defect,
        max_ux_right_half: max_ux,
        min_uy,
        uy_floor: floor,
        pass_symmetry: max_defect <= 1e-10,
        pass_ux: max_ux <= 1e-8,
        pass_uy: min_uy >= floor - 1e-6,
    }
}

/// `|u_t| <= C1 := ||Delta_p u0 + |grad u0|^q||_inf` checked against the
/// per-step `max |rhs|` monitor with 5% headroom.
pub fn time_derivative_bound(
    run: &RunResult,
    u0: &Field,
    grid: &Grid,
    params: &PdeParams,
    scheme: HamiltonianScheme,
) -> UtBoundSection {
    let r0 = rhs(u0, grid, params, scheme, 0.0);
    let mut c1 = 0.0f64;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            c1 = c1.max(r0.at(grid, i, j).abs());
        }
    }
    let mut max_ut = 0.0f64;
    for row in &run.series {
        max_ut = max_ut.max(row.max_ut_abs);
    }
    UtBoundSection {
        c_tilde_1: c1,
        max_abs_ut: max_ut,
        ratio: max_ut / c1.max(f64::MIN_POSITIVE),
        pass: max_ut <= 1.05 * c1,
    }
}

/// Boundary-distance-weighted gradient and value monitors:
/// `(max |grad u| delta^beta, max u delta^{-kappa})` over interior nodes.
pub fn bernstein_monitor(u: &Field, delta: &Field, grid: &Grid, params: &PdeParams) -> (f64, f64) {
    let e = params.exponents();
    let g = gradient(u, grid);
    let mut mg = 0.0f64;
    let mut mu_ = 0.0f64;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let k = grid.idx(i, j);
            let d = delta.values[k];
            mg = mg.max(g.norm_at(k) * d.powf(e.beta));
            mu_ = mu_.max(u.values[k] * d.powf(-e.kappa));
        }
    }
    (mg, mu_)
}

fn row_nearest(run: &RunResult, t: f64) -> &crate::evolution::SeriesRow {
    run.series
        .iter()
        .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
        .expect("series must be nonempty")
}

fn bernstein_section(
    run: &RunResult,
    grid: &Grid,
    params: &PdeParams,
    window: (f64, f64),
) -> BernsteinSection {
    let delta = boundary_distance(grid);
    let half = run.snapshot_nearest(window.0);
    let last = run.snapshot_nearest(window.1);
    let (mg_half, mu_half) = bernstein_monitor(half, &delta, grid, params);
    let (mg_final, mu_final) = bernstein_monitor(last, &delta, grid, params);
    let g_half = row_nearest(run, window.0).max_grad;
    let g_final = row_nearest(run, window.1).max_grad;
    BernsteinSection {
        m_grad_half: mg_half,
        m_grad_final: mg_final,
        m_u_half: mu_half,
        m_u_final: mu_final,
        grad_growth_window: g_final / g_half.max(f64::MIN_POSITIVE),
        pass_grad_ratio: mg_final <= 3.0 * mg_half,
        pass_u_ratio: mu_final <= 3.0 * mu_half,
    }
}

/// Bottom-edge one-sided |u_y| profile of one snapshot.
pub fn bottom_edge_profile(u: &Field, grid: &Grid) -> Vec<f64> {
    let g = gradient(u, grid);
    (0..grid.nx).map(|i| g.y[grid.idx(i, 0)].abs()).collect()
}

/// Smallest symmetric interval about x = 0 containing every bottom node with
/// `|u_y| >= max/2`; returns its length.
pub fn concentration_width(u: &Field, grid: &Grid) -> f64 {
    let prof = bottom_edge_profile(u, grid);
    let max = prof.iter().cloned().fold(0.0f64, f64::max);
    let mut xmax = 0.0f64;
    for (i, v) in prof.iter().enumerate() {
        if *v >= 0.5 * max {
            xmax = xmax.max(grid.x(i).abs());
        }
    }
    2.0 * xmax
}

/// Max one-sided boundary |grad u| over the off-center set: bottom nodes with
/// `|x| >= rho` plus the three other edges.
pub fn off_center_boundary_grad(u: &Field, grid: &Grid, rho: f64) -> f64 {
    let g = gradient(u, grid);
    let mut m = 0.0f64;
    for i in 0..grid.nx {
        if grid.x(i).abs() >= rho {
            m = m.max(g.norm_at(grid.idx(i, 0)));
        }
        m = m.max(g.norm_at(grid.idx(i, grid.ny - 1)));
    }
    for j in 0..grid.ny {
        m = m.max(g.norm_at(grid.idx(0, j)));
        m = m.max(g.norm_at(grid.idx(grid.nx - 1, j)));
    }
    m
}

fn localization_section(
    run: &RunResult,
    grid: &Grid,
    rho: f64,
    window: (f64, f64),
) -> Result<LocalizationSection, DiagnosticsError> {
    if run.status != RunStatus::GradientBlowUp {
        return Err(DiagnosticsError::NotABlowUpRun(run.status));
    }
    let late: Vec<&Field> = run.snapshots_in_window(window.0, window.1);
    if late.len() < 2 {
        return Err(DiagnosticsError::TooFewSnapshots(late.len()));
    }
    // argmax of bottom |u_y| within one cell of the center column, per late snapshot
    let mut centered = 0usize;
    for snap in &late {
        let prof = bottom_edge_profile(snap, grid);
        let (mut bi, mut bv) = (0usize, f64::NEG_INFINITY);
        for (i, v) in prof.iter().enumerate() {
            if *v > bv {
                bv = *v;
                bi = i;
            }
        }
        if (bi as isize - grid.center_ix() as isize).abs() <= 1 {
            centered += 1;
        }
    }
    let frac = centered as f64 / late.len() as f64;

    let first = &run.snapshots[0];
    let c = grid.center_ix();
    let center0 = bottom_edge_profile(first, grid)[c].max(f64::MIN_POSITIVE);
    let off0 = off_center_boundary_grad(first, grid, rho).max(f64::MIN_POSITIVE);
    let mut center_growth = 0.0f64;
    let mut off_growth = 0.0f64;
    for snap in &run.snapshots {
        center_growth = center_growth.max(bottom_edge_profile(snap, grid)[c] / center0);
        off_growth = off_growth.max(off_center_boundary_grad(snap, grid, rho) / off0);
    }

    let width_half = concentration_width(run.snapshot_nearest(window.0), grid);
    let width_final = concentration_width(run.snapshot_nearest(window.1), grid);

    Ok(LocalizationSection {
        argmax_at_center_fraction: frac,
        center_growth,
        off_center_growth: off_growth,
        width_half,
        width_final,
        pass_argmax: frac == 1.0,
        pass_off_center: off_growth <= 5.0 && center_growth >= 50.0,
        pass_width: width_final <= width_half,
    })
}

/// Halves `k` from `jp.k` until `max J <= tol` over the window snapshots, or
/// `k < 1e-6` (inconclusive).
pub fn k_search(
    run: &RunResult,
    grid: &Grid,
    jp: &JParams,
    window: (f64, f64),
    tol: f64,
) -> (Option<f64>, f64, usize) {
    let snaps = run.snapshots_in_window(window.0, window.1);
    let mut k = jp.k;
    let mut tried = 0usize;
    let mut last_max = f64::INFINITY;
    while k >= 1e-6 {
        tried += 1;
        let jpk = jp.with_k(k);
        let mut max_j = f64::NEG_INFINITY;
        for s in &snaps {
            max_j = max_j.max(evaluate_j(s, grid, &jpk).1.max);
        }
        last_max = max_j;
        if max_j <= tol {
            return (Some(k), max_j, tried);
        }
        k *= 0.5;
    }
    (None, last_max, tried)
}

fn j_sign_section(
    run: &RunResult,
    grid: &Grid,
    jp: &JParams,
    t_num: f64,
) -> Result<JSignSection, DiagnosticsError> {
    let tol = 1e-6;
    let window = (0.5 * t_num, t_num);
    if run.snapshots_in_window(window.0, window.1).len() < 2 {
        return Err(DiagnosticsError::TooFewSnapshots(0));
    }
    let (k_found, max_j, tried) = k_search(run, grid, jp, window, tol);
    let mut sensitivity = Vec::new();
    for f in [0.4, 0.5, 0.6] {
        let w = (f * t_num, t_num);
        let (kf, mj, _) = k_search(run, grid, jp, w, tol);
        sensitivity.push((f, kf, mj));
    }
    Ok(JSignSection {
        pass: k_found.is_some(),
        inconclusive: k_found.is_none(),
        k_found,
        max_j_at_k: max_j,
        tried,
        window,
        sensitivity,
    })
}

/// `inf over the region interior of (-u_x)/(x*y)`; strictly positive output is
/// the discrete corner separation.
pub fn corner_check(u: &Field, grid: &Grid, x1: f64, y1: f64) -> (f64, (f64, f64)) {
    let g = gradient(u, grid);
    let mut inf = f64::INFINITY;
    let mut witness = (0.0, 0.0);
    for j in 1..grid.ny - 1 {
        let y = grid.y(j);
        if y >= y1 {
            break;
        }
        for i in grid.center_ix() + 1..grid.nx - 1 {
            let x = grid.x(i);
            if x >= x1 {
                break;
            }
            let v = -g.x[grid.idx(i, j)] / (x * y);
            if v < inf {
                inf = v;
                witness = (x, y);
            }
        }
    }
    (inf, witness)
}

/// `sup over D interior of u * x^{2/(alpha-1)} * y^{-(1-2 sigma)}`.
pub fn weighted_profile(u: &Field, grid: &Grid, jp: &JParams) -> f64 {
    let px = 2.0 / (jp.alpha - 1.0);
    let py = -(1.0 - 2.0 * jp.sigma);
    let mut sup = 0.0f64;
    for j in 1..grid.ny - 1 {
        let y = grid.y(j);
        if y >= jp.y1 {
            break;
        }
        for i in grid.center_ix() + 1..grid.nx - 1 {
            let x = grid.x(i);
            if x >= jp.x1 {
                break;
            }
            sup = sup.max(u.at(grid, i, j) * x.powf(px) * y.powf(py));
        }
    }
    sup
}

/// Composes every section on one run. Localization, J, corner and weighted
/// profile need a blow-up run and are `None` otherwise.
pub fn diagnose(
    run: &RunResult,
    u0: &Field,
    grid: &Grid,
    params: &PdeParams,
    domain: &DomainSpec,
    jp: &JParams,
    scheme: HamiltonianScheme,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    if params.degenerate() {
        return Err(DiagnosticsError::DegenerateMu);
    }
    let t_num = run.t_final;
    let window = (0.5 * t_num, t_num);
    let symmetry = check_symmetry_monotonicity(run, params.mu);
    let ut_bound = time_derivative_bound(run, u0, grid, params, scheme);
    let bernstein = bernstein_section(run, grid, params, window);

    let blow_up = run.status == RunStatus::GradientBlowUp;
    let localization = if blow_up {
        Some(localization_section(run, grid, domain.rho, window)?)
    } else {
        None
    };
    let j_sign = if blow_up {
        Some(j_sign_section(run, grid, jp, t_num)?)
    } else {
        None
    };
    let (corner, weighted) = if blow_up {
        let snap_half = run.snapshot_nearest(window.0);
        let (value, witness) = corner_check(snap_half, grid, domain.x1, domain.y1);
        let w_half = weighted_profile(snap_half, grid, jp);
        let w_final = weighted_profile(run.snapshot_nearest(window.1), grid, jp);
        (
            Some(CornerSection {
                value,
                witness_xy: witness,
                snapshot_time: snap_half.time,
                pass: value > 0.0,
            }),
            Some(WeightedProfileSection {
                half: w_half,
                final_: w_final,
                ratio: w_final / w_half.max(f64::MIN_POSITIVE),
                pass: w_final <= 3.0 * w_half,
            }),
        )
    } else {
        (None, None)
    };

    Ok(DiagnosticsReport {
        status: run.status,
        t_num,
        window,
        don3: Don3Section {
            max_defect: symmetry.max_defect,
            pass: symmetry.pass_symmetry,
        },
        don4: Don4Section {
            max_ux_right_half: symmetry.max_ux_right_half,
            pass: symmetry.pass_ux,
        },
        don1: Don1Section {
            min_uy: symmetry.min_uy,
            floor: symmetry.uy_floor,
            pass: symmetry.pass_uy,
        },
        symmetry,
        ut_bound,
        bernstein,
        localization,
        j_sign,
        corner,
        weighted_profile: weighted,
    })
}
