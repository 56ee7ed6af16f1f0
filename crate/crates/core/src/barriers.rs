//! Comparison functions and their verification.
//!
//! Two barriers are built here:
//!
//! * the global barrier `Ubar = mu (y + eps_v V)` where `V` solves the linear
//!   anisotropic problem `-[V_xx + (p-1) V_yy] = 1` with a cutoff boundary
//!   profile equal to 1 on the bottom segment `[-rho/2, rho/2] x {0}` and 0 on
//!   the rest of the boundary away from `(-rho, rho) x {0}`. For small enough
//!   `mu` it is a stationary supersolution, `-Delta_p Ubar >= |grad Ubar|^q`,
//!   which pins the boundary gradient away from the origin;
//!
//! * the moving nondegeneracy barrier `v = eps * y * V^{-beta}` with
//!   `V = y + eta (r^2 - (x-x0)^2)(t - t0)`, verified in closed form since the
//!   derivatives are singular near `y = 0` where finite differences would
//!   dominate the residual sign.

use crate::grid::{Field, Grid};
use crate::initial::cutoff_phi;
use crate::ops::{gradient, hamiltonian_central, p_laplacian, HalfPow};
use crate::params::PdeParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BarrierError {
    #[error("elliptic solver did not converge: residual {residual} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("barrier property failed: {0}")]
    PropertyViolation(String),
    #[error("invalid barrier parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipticSolveReport {
    pub iterations: usize,
    pub rel_residual: f64,
    pub method: &'static str,
}

/// Conjugate gradients on the 5-point discretization of
/// `-[V_xx + (p-1) V_yy] = 1`, Dirichlet data from `bc`.
/// Converges to relative residual `tol` or errors out.
pub fn solve_elliptic(
    grid: &Grid,
    p: f64,
    bc: impl Fn(f64, f64) -> f64,
    tol: f64,
) -> Result<(Field, EllipticSolveReport), BarrierError> {
    let (nx, ny) = (grid.nx, grid.ny);
    let (mx, my) = (nx - 2, ny - 2); // interior sizes
    let n = mx * my;
    let cx = 1.0 / (grid.hx * grid.hx);
    let cy = (p - 1.0) / (grid.hy * grid.hy);
    let diag = 2.0 * (cx + cy);

    // boundary values
    let mut bvals = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if grid.is_boundary(i, j) {
                bvals[grid.idx(i, j)] = bc(grid.x(i), grid.y(j));
            }
        }
    }

    // rhs: source 1 plus boundary contributions
    let mut b = vec![1.0; n];
    for jj in 0..my {
        for ii in 0..mx {
            let (i, j) = (ii + 1, jj + 1);
            let k = jj * mx + ii;
            if i == 1 {
                b[k] += cx * bvals[grid.idx(0, j)];
            }
            if i == nx - 2 {
                b[k] += cx * bvals[grid.idx(nx - 1, j)];
            }
            if j == 1 {
                b[k] += cy * bvals[grid.idx(i, 0)];
            }
            if j == ny - 2 {
                b[k] += cy * bvals[grid.idx(i, ny - 1)];
            }
        }
    }

    let apply = |v: &[f64], out: &mut [f64]| {
        for jj in 0..my {
            for ii in 0..mx {
                let k = jj * mx + ii;
                let mut s = diag * v[k];
                if ii > 0 {
                    s -= cx * v[k - 1];
                }
                if ii + 1 < mx {
                    s -= cx * v[k + 1];
                }
                if jj > 0 {
                    s -= cy * v[k - mx];
                }
                if jj + 1 < my {
                    s -= cy * v[k + mx];
                }
                out[k] = s;
            }
        }
    };

    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let bnorm = dot(&b, &b).sqrt().max(f64::MIN_POSITIVE);

    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut pdir = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iters = 40 * (nx + ny);
    let mut iterations = 0;
    while rr.sqrt() / bnorm > tol {
        if iterations >= max_iters {
            return Err(BarrierError::NoConvergence {
                iterations,
                residual: rr.sqrt() / bnorm,
            });
        }
        apply(&pdir, &mut ap);
        let alpha = rr / dot(&pdir, &ap);
        for k in 0..n {
            x[k] += alpha * pdir[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            pdir[k] = r[k] + beta * pdir[k];
        }
        iterations += 1;
    }

    let mut v = Field::zeros(grid);
    v.values.copy_from_slice(&bvals);
    for jj in 0..my {
        for ii in 0..mx {
            v.values[grid.idx(ii + 1, jj + 1)] = x[jj * mx + ii];
        }
    }
    Ok((
        v,
        EllipticSolveReport {
            iterations,
            rel_residual: rr.sqrt() / bnorm,
            method: "cg",
        },
    ))
}

/// Boundary profile for the global-barrier solve: 1 on the bottom segment
/// `|x| <= rho/2`, 0 for `|x| >= rho` and on the other three edges, smooth in
/// between (the same cutoff geometry as the initial data).
pub fn barrier_boundary_profile(x: f64, y: f64, rho: f64) -> f64 {
    if y > 0.0 {
        0.0
    } else {
        cutoff_phi(2.0 * x / (3.0 * rho))
    }
}

/// Solves the auxiliary elliptic problem for the global barrier.
pub fn solve_v(
    grid: &Grid,
    p: f64,
    rho: f64,
) -> Result<(Field, EllipticSolveReport), BarrierError> {
    if !(rho > 0.0 && rho < grid.half_width) {
        return Err(BarrierError::Invalid(format!(
            "need 0 < rho < half_width, got rho={rho}"
        )));
    }
    solve_elliptic(grid, p, |x, y| barrier_boundary_profile(x, y, rho), 1e-10)
}

/// Worst-node residual of a static supersolution check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualReport {
    pub min: f64,
    pub witness_node: (usize, usize),
    pub witness_xy: (f64, f64),
    pub samples: usize,
}

/// `min over interior of (-Delta_p u - |grad u|^q)`; nonnegative means `u` is
/// a discrete stationary supersolution.
pub fn verify_supersolution_static(
    ubar: &Field,
    grid: &Grid,
    params: &PdeParams,
) -> ResidualReport {
    let pl = p_laplacian(ubar, grid, params.p);
    let g = gradient(ubar, grid);
    let h = hamiltonian_central(&g, params.q);
    let mut min = f64::INFINITY;
    let mut node = (1, 1);
    let mut samples = 0;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let k = grid.idx(i, j);
            let r = -pl.values[k] - h.values[k];
            samples += 1;
            if r < min {
                min = r;
                node = (i, j);
            }
        }
    }
    ResidualReport {
        min,
        witness_node: node,
        witness_xy: (grid.x(node.0), grid.y(node.1)),
        samples,
    }
}

/// Assembled global barrier for one value of `mu`.
#[derive(Debug, Clone, Serialize)]
pub struct GlobalBarrier {
    pub eps_v: f64,
    pub ubar: Field,
    /// `max |eps_v * V_y|` over all nodes; must be <= 1/2.
    pub max_uy: f64,
    /// min of V over interior nodes (positivity check).
    pub min_v_interior: f64,
}

/// Chooses `eps_v` and forms `Ubar = mu (y + eps_v V)`.
///
/// `eps_v` starts at the sufficient bound `1/(||V_x|| + 2 ||V_y||)` and is
/// halved until the perturbation bracket in the p-Laplacian expansion of
/// `Ubar` is at most 1/2, evaluated with discrete derivatives of `V`. Both
/// smallness conditions come from the same sufficiency argument; neither is
/// optimized.
pub fn assemble_global_barrier(
    v: &Field,
    grid: &Grid,
    mu: f64,
    params: &PdeParams,
) -> Result<GlobalBarrier, BarrierError> {
    let g = gradient(v, grid);
    let mut max_vx = 0.0f64;
    let mut max_vy = 0.0f64;
    for k in 0..g.x.len() {
        max_vx = max_vx.max(g.x[k].abs());
        max_vy = max_vy.max(g.y[k].abs());
    }
    let mut eps = 1.0 / (max_vx + 2.0 * max_vy);

    // second derivatives of V (central, interior)
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx2, hy2, hxy) = (
        grid.hx * grid.hx,
        grid.hy * grid.hy,
        4.0 * grid.hx * grid.hy,
    );
    let bracket = |eps: f64| -> f64 {
        let mut worst = 0.0f64;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = grid.idx(i, j);
                let vxx = (v.values[k + 1] - 2.0 * v.values[k] + v.values[k - 1]) / hx2;
                let vyy = (v.values[k + nx] - 2.0 * v.values[k] + v.values[k - nx]) / hy2;
                let vxy = (v.values[k + nx + 1] - v.values[k + nx - 1] - v.values[k - nx + 1]
                    + v.values[k - nx - 1])
                    / hxy;
                let vx = g.x[k];
                let vy = g.y[k];
                let denom = (1.0 + eps * vy).powi(2) + (eps * vx).powi(2);
                let pert = (params.p - 2.0)
                    * (eps * eps * vx * vx * (vxx - vyy) + 2.0 * eps * vx * (1.0 + eps * vy) * vxy)
                        .abs()
                    / denom;
                worst = worst.max(pert);
            }
        }
        worst
    };
    let mut halvings = 0;
    while bracket(eps) > 0.5 {
        eps *= 0.5;
        halvings += 1;
        if halvings > 60 {
            return Err(BarrierError::Invalid(
                "could not find eps_v with controlled perturbation bracket".into(),
            ));
        }
    }

    let mut max_uy = 0.0f64;
    for k in 0..g.y.len() {
        max_uy = max_uy.max((eps * g.y[k]).abs());
    }
    if max_uy > 0.5 + 1e-12 {
        return Err(BarrierError::PropertyViolation(format!(
            "|d/dy (eps_v V)| = {max_uy} exceeds 1/2"
        )));
    }

    let mut min_v_interior = f64::INFINITY;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            min_v_interior = min_v_interior.min(v.at(grid, i, j));
        }
    }
    if min_v_interior <= 0.0 {
        return Err(BarrierError::PropertyViolation(format!(
            "V must be positive on interior nodes, min {min_v_interior}"
        )));
    }

    let mut ubar = Field::zeros(grid);
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.idx(i, j);
            ubar.values[k] = mu * (grid.y(j) + eps * v.values[k]);
        }
    }
    Ok(GlobalBarrier {
        eps_v: eps,
        ubar,
        max_uy,
        min_v_interior,
    })
}

/// Bundle of the elliptic solution, the assembled barrier at the largest
/// validated `mu`, and the residual report there.
#[derive(Debug, Clone, Serialize)]
pub struct BarrierBundle {
    pub v: Field,
    pub eps_v: f64,
    pub mu0_found: f64,
    pub ubar: Field,
    pub residual: ResidualReport,
    pub solve: EllipticSolveReport,
}

/// Bisection over `mu` in `(0, 1]` for the largest value whose assembled
/// barrier has `min (-Delta_p Ubar - |grad Ubar|^q) >= -1e-8`; 40 iterations
/// with early exit at width 1e-6.
pub fn find_global_barrier(
    grid: &Grid,
    params: &PdeParams,
    rho: f64,
) -> Result<BarrierBundle, BarrierError> {
    let (v, solve) = solve_v(grid, params.p, rho)?;
    let residual_ok = |mu: f64| -> (bool, GlobalBarrier, ResidualReport) {
        let gb = assemble_global_barrier(&v, grid, mu, params).expect("eps_v already validated");
        let rep = verify_supersolution_static(&gb.ubar, grid, params);
        (rep.min >= -1e-8, gb, rep)
    };

    let (ok_hi, gb_hi, rep_hi) = residual_ok(1.0);
    if ok_hi {
        return Ok(BarrierBundle {
            eps_v: gb_hi.eps_v,
            mu0_found: 1.0,
            ubar: gb_hi.ubar,
            residual: rep_hi,
            solve,
            v,
        });
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut best: Option<(f64, GlobalBarrier, ResidualReport)> = None;
    for _ in 0..40 {
        if hi - lo <= 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (ok, gb, rep) = residual_ok(mid);
        if ok {
            lo = mid;
            best = Some((mid, gb, rep));
        } else {
            hi = mid;
        }
    }
    match best {
        Some((mu0, gb, rep)) => Ok(BarrierBundle {
            eps_v: gb.eps_v,
            mu0_found: mu0,
            ubar: gb.ubar,
            residual: rep,
            solve,
            v,
        }),
        None => Err(BarrierError::PropertyViolation(
            "no positive mu produced a nonnegative supersolution residual".into(),
        )),
    }
}

/// Parameters of the nondegeneracy barrier `v = eps * y * V^{-beta}` with
/// `V = y + eta (r^2 - (x-x0)^2)(t - t0)` on the box
/// `|x - x0| < r, 0 < y < d`, time window `(t0, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondegBarrierParams {
    pub eps0: f64,
    pub eta: f64,
    pub r: f64,
    pub d: f64,
    pub x0: f64,
    pub t0: f64,
    pub t_end: f64,
    pub beta: f64,
}

impl NondegBarrierParams {
    pub fn new(
        eps0: f64,
        eta: f64,
        r: f64,
        d: f64,
        x0: f64,
        t0: f64,
        t_end: f64,
        beta: f64,
    ) -> Result<Self, BarrierError> {
        if !(eps0 > 0.0 && eta > 0.0 && r > 0.0 && d > 0.0 && t_end > t0) {
            return Err(BarrierError::Invalid(
                "need positive eps0, eta, r, d and t_end > t0".into(),
            ));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(BarrierError::Invalid(format!(
                "need 0 < beta < 1, got {beta}"
            )));
        }
        let window = t_end - t0;
        if eta > d / (window * r * r) {
            return Err(BarrierError::Invalid(format!(
                "eta = {eta} violates eta <= d / (window * r^2) = {}",
                d / (window * r * r)
            )));
        }
        Ok(NondegBarrierParams {
            eps0,
            eta,
            r,
            d,
            x0,
            t0,
            t_end,
            beta,
        })
    }
}

/// Closed-form derivatives of the nondegeneracy barrier at one point.
#[derive(Debug, Clone, Copy)]
pub struct BarrierDerivs {
    pub v: f64,
    pub vt: f64,
    pub vx: f64,
    pub vy: f64,
    pub vxx: f64,
    pub vxy: f64,
    pub vyy: f64,
}

/// Evaluates the barrier and all first/second derivatives in closed form.
pub fn nondeg_closed_forms(bp: &NondegBarrierParams, x: f64, y: f64, t: f64) -> BarrierDerivs {
    let eps = bp.eps0;
    let beta = bp.beta;
    let eta = bp.eta;
    let dx = x - bp.x0;
    let dt = t - bp.t0;
    let par = bp.r * bp.r - dx * dx;
    let big_v = y + eta * par * dt;
    let vm = big_v.powf(-beta); // V^{-beta}
    let vm1 = vm / big_v; // V^{-beta-1}
    let yv = y / big_v;

    BarrierDerivs {
        v: eps * y * vm,
        vt: -eps * beta * eta * y * par * vm1,
        vx: 2.0 * eps * beta * eta * y * dx * dt * vm1,
        vy: eps * vm * (1.0 - beta * yv),
        vxx: 2.0 * eps * beta * eta * dt * vm1 * (y + 2.0 * (beta + 1.0) * eta * dx * dx * dt * yv),
        vyy: eps * beta * vm1 * (-2.0 + (beta + 1.0) * yv),
        vxy: 2.0 * eps * beta * eta * dx * dt * vm1 * (1.0 - (beta + 1.0) * yv),
    }
}

/// `v_t - Delta_p v - |grad v|^q` assembled from the closed forms.
pub fn nondeg_residual_at(
    bp: &NondegBarrierParams,
    params: &PdeParams,
    x: f64,
    y: f64,
    t: f64,
) -> f64 {
    let d = nondeg_closed_forms(bp, x, y, t);
    let g2 = d.vx * d.vx + d.vy * d.vy;
    let hp = HalfPow::for_norm_exponent(params.p - 2.0);
    let hq = HalfPow::for_norm_exponent(params.q);
    let lap = d.vxx + d.vyy;
    let second = d.vx * d.vx * d.vxx + 2.0 * d.vx * d.vy * d.vxy + d.vy * d.vy * d.vyy;
    let delta_p = hp.apply(g2) * (lap + (params.p - 2.0) * second / g2);
    d.vt - delta_p - hq.apply(g2)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NondegReport {
    pub min_residual: f64,
    pub witness: (f64, f64, f64),
    pub samples: usize,
}

/// Minimum of the closed-form residual over a sample lattice in the
/// space-time box (cell centers, so `y > 0` and `t > t0` strictly).
pub fn verify_nondeg_barrier(
    bp: &NondegBarrierParams,
    params: &PdeParams,
    samples: (usize, usize, usize),
) -> NondegReport {
    let (nx, ny, nt) = samples;
    let mut min = f64::INFINITY;
    let mut witness = (bp.x0, 0.0, bp.t0);
    for it in 0..nt {
        let t = bp.t0 + (it as f64 + 0.5) / nt as f64 * (bp.t_end - bp.t0);
        for jy in 0..ny {
            let y = (jy as f64 + 0.5) / ny as f64 * bp.d;
            for ix in 0..nx {
                let x = bp.x0 - bp.r + (ix as f64 + 0.5) / nx as f64 * (2.0 * bp.r);
                let r = nondeg_residual_at(bp, params, x, y, t);
                if r < min {
                    min = r;
                    witness = (x, y, t);
                }
            }
        }
    }
    NondegReport {
        min_residual: min,
        witness,
        samples: nx * ny * nt,
    }
}

/// Coarse map of the `(eps, eta)` validity region: log-spaced grid, coarse
/// sampling per cell, returning `(eps, eta, min_residual)` triples.
pub fn scan_nondeg_region(
    params: &PdeParams,
    r: f64,
    d: f64,
    x0: f64,
    t0: f64,
    t_end: f64,
    eps_range: (f64, f64),
    eta_range: (f64, f64),
    steps: usize,
) -> Vec<(f64, f64, f64)> {
    let beta = params.exponents().beta;
    let mut out = Vec::new();
    let logspace = |lo: f64, hi: f64, k: usize| -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (steps - 1) as f64).exp()
    };
    for ke in 0..steps {
        let eps = logspace(eps_range.0, eps_range.1, ke);
        for kn in 0..steps {
            let eta = logspace(eta_range.0, eta_range.1, kn);
            match NondegBarrierParams::new(eps, eta, r, d, x0, t0, t_end, beta) {
                Ok(bp) => {
                    let rep = verify_nondeg_barrier(&bp, params, (24, 24, 24));
                    out.push((eps, eta, rep.min_residual));
                }
                Err(_) => out.push((eps, eta, f64::NEG_INFINITY)),
            }
        }
    }
    out
}
