//! The auxiliary functional `J = u_x + k x y^{-gamma} u^alpha` on the corner
//! rectangle `D = (0, x1) x (0, y1)`.
//!
//! Its sign over the late time window is the sharpest checkable consequence of
//! the single-point localization mechanism: once `J <= 0`, integrating in `x`
//! bounds `u` by a power of `y` away from the center column, which rules out
//! gradient blow-up there.

use crate::grid::{Field, Grid};
use crate::ops::gradient;
use crate::params::PdeParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JError {
    #[error("invalid weight parameters: {0}")]
    Invalid(String),
}

/// Weight parameters of the functional. `gamma` is derived:
/// `gamma = (1 - 2 sigma)(alpha - 1)` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JParams {
    pub k: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// Corner rectangle extents (0, x1) x (0, y1).
    pub x1: f64,
    pub y1: f64,
}

impl JParams {
    pub fn new(
        k: f64,
        alpha: f64,
        sigma: f64,
        x1: f64,
        y1: f64,
        params: &PdeParams,
    ) -> Result<Self, JError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(JError::Invalid(format!("k must be > 0, got {k}")));
        }
        let alpha_sup = 1.0 + params.q - params.p;
        if !(alpha > 1.0 && alpha < alpha_sup) {
            return Err(JError::Invalid(format!(
                "need 1 < alpha < {alpha_sup}, got {alpha}"
            )));
        }
        let sigma_max = params.exponents().sigma_max;
        if !(sigma > 0.0 && sigma < sigma_max) {
            return Err(JError::Invalid(format!(
                "need 0 < sigma < {sigma_max}, got {sigma}"
            )));
        }
        if !(x1 > 0.0 && y1 > 0.0) {
            return Err(JError::Invalid(format!(
                "need positive region extents, got x1={x1}, y1={y1}"
            )));
        }
        Ok(JParams {
            k,
            alpha,
            sigma,
            gamma: (1.0 - 2.0 * sigma) * (alpha - 1.0),
            x1,
            y1,
        })
    }

    pub fn with_k(&self, k: f64) -> Self {
        JParams { k, ..*self }
    }
}

/// Result of evaluating `J` over the corner rectangle at one time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JEval {
    pub max: f64,
    /// Node attaining the maximum.
    pub argmax: (usize, usize),
    pub argmax_xy: (f64, f64),
    /// Maximum of the weight term alone (its argmax is invariant in `k`).
    pub weight_argmax: (usize, usize),
    pub nodes: usize,
}

#[inline]
fn d_columns(grid: &Grid, x1: f64) -> std::ops::Range<usize> {
    // strictly inside (0, x1)
    let c = grid.center_ix();
    let mut hi = c + 1;
    while hi < grid.nx && grid.x(hi) < x1 {
        hi += 1;
    }
    (c + 1)..hi
}

#[inline]
fn d_rows(grid: &Grid, y1: f64) -> std::ops::Range<usize> {
    let mut hi = 1;
    while hi < grid.ny && grid.y(hi) < y1 {
        hi += 1;
    }
    1..hi
}

/// Evaluates `J` on `D`'s grid interior plus the `y = 0` row, where the weight
/// term extends continuously by zero (`u <= C y` near the bottom and
/// `alpha - gamma > 1`). Returns the nodewise field on the full grid layout
/// (zero outside `D`) together with the maximum.
pub fn evaluate_j(u: &Field, grid: &Grid, jp: &JParams) -> (Field, JEval) {
    assert!(u.matches(grid));
    let g = gradient(u, grid);
    let mut out = Field::zeros(grid);
    out.time = u.time;
    let cols = d_columns(grid, jp.x1);
    let rows = d_rows(grid, jp.y1);
    let mut max = f64::NEG_INFINITY;
    let mut argmax = (cols.start, 0);
    let mut wmax = f64::NEG_INFINITY;
    let mut wargmax = (cols.start, 0);
    let mut nodes = 0usize;

    // y = 0 row: J = u_x
    for i in cols.clone() {
        let k = grid.idx(i, 0);
        let v = g.x[k];
        out.values[k] = v;
        nodes += 1;
        if v > max {
            max = v;
            argmax = (i, 0);
        }
    }
    for j in rows {
        let y = grid.y(j);
        let ypow = y.powf(-jp.gamma);
        for i in cols.clone() {
            let k = grid.idx(i, j);
            let uu = u.values[k];
            debug_assert!(uu > 0.0, "u must be positive on D's interior");
            let weight = jp.k * grid.x(i) * ypow * uu.powf(jp.alpha);
            let v = g.x[k] + weight;
            out.values[k] = v;
            nodes += 1;
            if v > max {
                max = v;
                argmax = (i, j);
            }
            if weight > wmax {
                wmax = weight;
                wargmax = (i, j);
            }
        }
    }
    let eval = JEval {
        max,
        argmax,
        argmax_xy: (grid.x(argmax.0), grid.y(argmax.1)),
        weight_argmax: wargmax,
        nodes,
    };
    (out, eval)
}

/// Maximum of `J` over `D` (cheap path for per-step monitoring).
pub fn j_max(u: &Field, grid: &Grid, jp: &JParams) -> f64 {
    evaluate_j(u, grid, jp).1.max
}
