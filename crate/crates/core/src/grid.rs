//! Computational domain and uniform grid.
//!
//! The domain is the axis-aligned rectangle `(-a, a) x (0, b)`: symmetric in
//! `x`, convex in the `x`-direction, with the flat bottom edge centered at the
//! origin. `nx` is required to be odd so that `x = 0` is a grid column and
//! mirror symmetry can be checked bitwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("nx must be odd so that x = 0 is a grid column, got {0}")]
    EvenNx(usize),
    #[error("grid too small: need nx >= 5 and ny >= 5, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("domain constraint violated: {0}")]
    Constraint(String),
}

/// Rectangle geometry plus the inner-box, localization and comparison-window
/// parameters used by the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    /// `a`: the rectangle is `(-a, a) x (0, b)`.
    pub half_width: f64,
    /// `b`.
    pub height: f64,
    /// Inner box half-width; the domain must contain `(-l1, l1) x (0, 2*l2)`.
    pub l1: f64,
    /// Inner box half-height.
    pub l2: f64,
    /// Localization radius: the blow-up set is expected inside `[-rho, rho] x {0}`.
    pub rho: f64,
    /// Width of the corner comparison rectangle `(0, x1) x (0, y1)`.
    pub x1: f64,
    /// Height of the corner comparison rectangle.
    pub y1: f64,
}

impl DomainSpec {
    pub fn new(
        half_width: f64,
        height: f64,
        l1: f64,
        l2: f64,
        rho: f64,
        x1: f64,
        y1: f64,
    ) -> Result<Self, GridError> {
        let all = [half_width, height, l1, l2, rho, x1, y1];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(GridError::Constraint(format!(
                "all domain lengths must be positive and finite, got {all:?}"
            )));
        }
        if !(l1 < half_width) {
            return Err(GridError::Constraint(format!(
                "need l1 < half_width, got l1={l1}, half_width={half_width}"
            )));
        }
        if !(2.0 * l2 < height) {
            return Err(GridError::Constraint(format!(
                "need 2*l2 < height, got l2={l2}, height={height}"
            )));
        }
        if !(rho < x1) {
            return Err(GridError::Constraint(format!(
                "need rho < x1, got rho={rho}, x1={x1}"
            )));
        }
        if !(x1 < l1) {
            return Err(GridError::Constraint(format!(
                "need x1 < l1, got x1={x1}, l1={l1}"
            )));
        }
        if !(y1 < l2) {
            return Err(GridError::Constraint(format!(
                "need y1 < l2, got y1={y1}, l2={l2}"
            )));
        }
        Ok(DomainSpec {
            half_width,
            height,
            l1,
            l2,
            rho,
            x1,
            y1,
        })
    }
}

impl Default for DomainSpec {
    /// Geometry on which all inequalities between the parameters hold strictly.
    fn default() -> Self {
        DomainSpec::new(1.5, 2.5, 1.0, 1.0, 0.5, 0.75, 0.5).unwrap()
    }
}

/// Uniform grid over `[-a, a] x [0, b]`, node `(i, j)` at
/// `(x_i, y_j) = ((i - c) hx, j hy)` with `c = (nx-1)/2`.
///
/// Coordinates are built from the center column outward so that
/// `x(mirror(i)) == -x(i)` holds bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub half_width: f64,
    pub height: f64,
}

impl Grid {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as isize - self.center_ix() as isize) as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    #[inline]
    pub fn center_ix(&self) -> usize {
        (self.nx - 1) / 2
    }

    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.nx - 1 - i
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Distance to the rectangle boundary, exact zeros on boundary nodes.
    pub fn boundary_distance_at(&self, i: usize, j: usize) -> f64 {
        let dx = i.min(self.nx - 1 - i) as f64 * self.hx;
        let dy = j.min(self.ny - 1 - j) as f64 * self.hy;
        dx.min(dy)
    }
}

/// Builds the uniform grid. `nx` must be odd and both counts at least 5.
pub fn build_grid(spec: &DomainSpec, nx: usize, ny: usize) -> Result<Grid, GridError> {
    if nx < 5 || ny < 5 {
        return Err(GridError::TooSmall { nx, ny });
    }
    if nx % 2 == 0 {
        return Err(GridError::EvenNx(nx));
    }
    Ok(Grid {
        nx,
        ny,
        hx: 2.0 * spec.half_width / (nx - 1) as f64,
        hy: spec.height / (ny - 1) as f64,
        half_width: spec.half_width,
        height: spec.height,
    })
}

/// Scalar sample of a field (e.g. `u`) on a grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Field {
            nx: grid.nx,
            ny: grid.ny,
            values: vec![0.0; grid.n_nodes()],
            time: 0.0,
        }
    }

    pub fn from_fn(grid: &Grid, time: f64, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Field {
            nx: grid.nx,
            ny: grid.ny,
            values,
            time,
        }
    }

    #[inline]
    pub fn at(&self, grid: &Grid, i: usize, j: usize) -> f64 {
        self.values[grid.idx(i, j)]
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Snapshot dump: `x,y,value` rows, row-major by `y` then `x`.
    pub fn write_csv(&self, grid: &Grid, w: &mut impl std::io::Write) -> std::io::Result<()> {
        assert!(self.matches(grid), "field dimensions do not match grid");
        writeln!(w, "# field: u; t = {}", self.time)?;
        writeln!(w, "x,y,value")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                writeln!(w, "{},{},{}", grid.x(i), grid.y(j), self.at(grid, i, j))?;
            }
        }
        Ok(())
    }
}

/// `delta(x, y) = min(a - |x|, y, b - y)` sampled at every node.
pub fn boundary_distance(grid: &Grid) -> Field {
    let mut f = Field::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            f.values[grid.idx(i, j)] = grid.boundary_distance_at(i, j);
        }
    }
    f
}
