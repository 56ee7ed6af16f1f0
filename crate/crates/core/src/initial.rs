//! Well-prepared initial data: the bump family
//! `u0 = mu*y + A * eps^kappa * phi(x/eps) * psi_eps(y)`
//! built from a fixed C^2 cutoff, plus the validator for the five structural
//! conditions the evolution and diagnostics rely on.

use crate::grid::{DomainSpec, Field, Grid};
use crate::ops::gradient;
use crate::params::ScalingExponents;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `sup |phi'|` for the quintic-smoothstep cutoff: the smoothstep reaches slope
/// 15/8 at mid-transition and the transition width is 1/3.
pub const CUTOFF_SLOPE_MAX: f64 = 45.0 / 8.0;

#[derive(Debug, Error)]
pub enum InitialDataError {
    #[error("invalid initial-data parameter: {0}")]
    Invalid(String),
    #[error("bump support exits the domain: {0}")]
    SupportOutsideDomain(String),
}

fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Even C^2 cutoff: 1 on `[-1/3, 1/3]`, 0 outside `(-2/3, 2/3)`, quintic
/// smoothstep in `|s|` across the transition, non-increasing in `|s|`.
pub fn cutoff_phi(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 / 3.0 {
        1.0
    } else if a >= 2.0 / 3.0 {
        0.0
    } else {
        1.0 - smoothstep5((a - 1.0 / 3.0) * 3.0)
    }
}

/// Vertical profile: `phi((y-eps)/eps)` below the bump center, then the slow
/// decay `phi((y-eps)/l2)` above it; continuous with value 1 at `y = eps`.
pub fn psi_eps(y: f64, eps: f64, l2: f64) -> f64 {
    if y <= eps {
        cutoff_phi((y - eps) / eps)
    } else {
        cutoff_phi((y - eps) / l2)
    }
}

/// Bump family parameters. `amplitude` is the free prefactor multiplying
/// `eps^kappa`; the blow-up threshold in this knob is located empirically by
/// the calibration routine rather than assumed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    /// Bump scale.
    pub eps: f64,
    /// Prefactor `A` of `A * eps^kappa`.
    pub amplitude: f64,
    /// Boundary slope (copied from the PDE parameters).
    pub mu: f64,
    /// Localization constant `c` of the strip bound
    /// `u0 <= mu (y + c * chi_strip)`.
    pub loc_c: f64,
}

impl InitialDataSpec {
    pub fn new(eps: f64, amplitude: f64, mu: f64, loc_c: f64) -> Result<Self, InitialDataError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(InitialDataError::Invalid(format!(
                "eps must be > 0, got {eps}"
            )));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(InitialDataError::Invalid(format!(
                "amplitude must be > 0, got {amplitude}"
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(InitialDataError::Invalid(format!(
                "mu must be >= 0, got {mu}"
            )));
        }
        if !(loc_c.is_finite() && loc_c > 0.0) {
            return Err(InitialDataError::Invalid(format!(
                "loc_c must be > 0, got {loc_c}"
            )));
        }
        Ok(InitialDataSpec {
            eps,
            amplitude,
            mu,
            loc_c,
        })
    }

    /// Geometric admissibility of the bump scale. The bump support is
    /// `(-2eps/3, 2eps/3) x (eps/3, eps + 2*l2/3)` and must sit strictly
    /// inside the rectangle, together with the core ball `B_{eps/3}(0, eps)`.
    pub fn check_support(&self, domain: &DomainSpec) -> Result<(), InitialDataError> {
        if !(self.eps < domain.l1.min(domain.l2 / 2.0)) {
            return Err(InitialDataError::Invalid(format!(
                "need eps < min(l1, l2/2) = {}, got {}",
                domain.l1.min(domain.l2 / 2.0),
                self.eps
            )));
        }
        let x_support = 2.0 * self.eps / 3.0;
        if !(x_support < domain.half_width) {
            return Err(InitialDataError::SupportOutsideDomain(format!(
                "x-support half-width {x_support} >= half_width {}",
                domain.half_width
            )));
        }
        let y_top = self.eps + 2.0 * domain.l2 / 3.0;
        if !(y_top < domain.height) {
            return Err(InitialDataError::SupportOutsideDomain(format!(
                "y-support top {y_top} >= height {}",
                domain.height
            )));
        }
        Ok(())
    }
}

/// Samples `u0 = mu*y + A*eps^kappa*phi(x/eps)*psi_eps(y)` at the grid nodes.
/// Boundary rows equal `mu*y` exactly (the bump vanishes there by support).
pub fn build_initial_data(
    spec: &InitialDataSpec,
    grid: &Grid,
    domain: &DomainSpec,
    exps: &ScalingExponents,
) -> Result<Field, InitialDataError> {
    spec.check_support(domain)?;
    let bump = spec.amplitude * spec.eps.powf(exps.kappa);
    let mut u0 = Field::from_fn(grid, 0.0, |x, y| {
        spec.mu * y + bump * cutoff_phi(x / spec.eps) * psi_eps(y, spec.eps, domain.l2)
    });
    // hold the Dirichlet rows exactly
    for i in 0..grid.nx {
        u0.values[grid.idx(i, 0)] = 0.0;
        u0.values[grid.idx(i, grid.ny - 1)] = spec.mu * grid.y(grid.ny - 1);
    }
    for j in 0..grid.ny {
        let y = spec.mu * grid.y(j);
        u0.values[grid.idx(0, j)] = y;
        u0.values[grid.idx(grid.nx - 1, j)] = y;
    }
    Ok(u0)
}

/// Worst node found while checking a condition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    /// Schema key of the condition in validation reports.
    pub anchor: &'static str,
    pub pass: bool,
    /// Signed margin: nonnegative iff the condition holds.
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl ConditionCheck {
    fn from_min(anchor: &'static str, min: f64, witness: Witness, tol: f64) -> Self {
        ConditionCheck {
            anchor,
            pass: min >= -tol,
            margin: min,
            witness: Some(witness),
        }
    }
}

/// Pass/fail per structural condition, with worst-node witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Mirror symmetry about `x = 0` (bitwise).
    pub don00: ConditionCheck,
    /// `d/dx u0 <= 0` on the right half.
    pub don0b: ConditionCheck,
    /// `d/dy u0 >= mu/2`.
    pub don1b: ConditionCheck,
    /// `u0 <= mu (y + loc_c * chi_strip)`.
    pub don0b2c: ConditionCheck,
    /// `u0 >= A*eps^kappa` on the core ball `B_{eps/3}(0, eps)`.
    pub don4b: ConditionCheck,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.don00.pass
            && self.don0b.pass
            && self.don1b.pass
            && self.don0b2c.pass
            && self.don4b.pass
    }

    pub fn conditions(&self) -> [&ConditionCheck; 5] {
        [
            &self.don00,
            &self.don0b,
            &self.don1b,
            &self.don0b2c,
            &self.don4b,
        ]
    }
}

/// Checks the five conditions with discrete derivatives. Failures are
/// reported, not raised.
pub fn validate_initial_data(
    u0: &Field,
    spec: &InitialDataSpec,
    domain: &DomainSpec,
    grid: &Grid,
    exps: &ScalingExponents,
) -> ValidationReport {
    assert!(u0.matches(grid));
    let tol = 1e-12;
    let g = gradient(u0, grid);

    // don00: bitwise mirror symmetry
    let mut sym_worst = 0.0f64;
    let mut sym_wit = Witness {
        i: 0,
        j: 0,
        x: grid.x(0),
        y: 0.0,
        value: 0.0,
    };
    for j in 0..grid.ny {
        for i in 0..=grid.center_ix() {
            let d = (u0.at(grid, i, j) - u0.at(grid, grid.mirror(i), j)).abs();
            if d > sym_worst {
                sym_worst = d;
                sym_wit = Witness {
                    i,
                    j,
                    x: grid.x(i),
                    y: grid.y(j),
                    value: d,
                };
            }
        }
    }
    let don00 = ConditionCheck {
        anchor: "don00",
        pass: sym_worst == 0.0,
        margin: -sym_worst,
        witness: Some(sym_wit),
    };

    // don0b: u_x <= 0 on x > 0
    let mut worst = f64::INFINITY;
    let mut wit = sym_wit;
    for j in 0..grid.ny {
        for i in grid.center_ix() + 1..grid.nx {
            let m = -g.x[grid.idx(i, j)];
            if m < worst {
                worst = m;
                wit = Witness {
                    i,
                    j,
                    x: grid.x(i),
                    y: grid.y(j),
                    value: g.x[grid.idx(i, j)],
                };
            }
        }
    }
    let don0b = ConditionCheck::from_min("don0b", worst, wit, tol);

    // don1b: u_y >= mu/2
    let mut worst = f64::INFINITY;
    let mut wit = sym_wit;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let m = g.y[grid.idx(i, j)] - spec.mu / 2.0;
            if m < worst {
                worst = m;
                wit = Witness {
                    i,
                    j,
                    x: grid.x(i),
                    y: grid.y(j),
                    value: g.y[grid.idx(i, j)],
                };
            }
        }
    }
    let don1b = ConditionCheck::from_min("don1b", worst, wit, tol);

    // don0b2c: u0 <= mu(y + loc_c) inside the strip, u0 <= mu*y outside
    let mut worst = f64::INFINITY;
    let mut wit = sym_wit;
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            let x = grid.x(i);
            let in_strip = x.abs() < domain.rho / 2.0 && y > 0.0 && y < domain.l2;
            let cap = spec.mu * (y + if in_strip { spec.loc_c } else { 0.0 });
            let m = cap - u0.at(grid, i, j);
            if m < worst {
                worst = m;
                wit = Witness {
                    i,
                    j,
                    x,
                    y,
                    value: u0.at(grid, i, j),
                };
            }
        }
    }
    let don0b2c = ConditionCheck::from_min("don0b2c", worst, wit, tol);

    // don4b: u0 >= A*eps^kappa on the core ball
    let floor = spec.amplitude * spec.eps.powf(exps.kappa);
    let r2 = (spec.eps / 3.0) * (spec.eps / 3.0);
    let mut worst = f64::INFINITY;
    let mut wit = sym_wit;
    let mut any = false;
    for j in 0..grid.ny {
        let y = grid.y(j);
        for i in 0..grid.nx {
            let x = grid.x(i);
            if x * x + (y - spec.eps) * (y - spec.eps) <= r2 {
                any = true;
                let m = u0.at(grid, i, j) - floor;
                if m < worst {
                    worst = m;
                    wit = Witness {
                        i,
                        j,
                        x,
                        y,
                        value: u0.at(grid, i, j),
                    };
                }
            }
        }
    }
    if !any {
        // ball unresolved by the grid: fail loudly rather than vacuously pass
        worst = f64::NEG_INFINITY;
    }
    let don4b = ConditionCheck::from_min("don4b", worst, wit, tol);

    ValidationReport {
        don00,
        don0b,
        don1b,
        don0b2c,
        don4b,
    }
}
