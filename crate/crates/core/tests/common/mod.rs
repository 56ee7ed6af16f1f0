//! Independent oracles shared by the integration suites: closed-form
//! differential operators for analytic test functions, the Fourier series for
//! the unit-square torsion maximum, and a generic residual composer. These
//! stay independent of the implementation paths they check (the crate's
//! operators never appear on the oracle side of a comparison).

#![allow(dead_code)]

/// Closed-form first and second derivatives of a scalar test function.
#[derive(Debug, Clone, Copy)]
pub struct Derivs {
    pub v: f64,
    pub vt: f64,
    pub vx: f64,
    pub vy: f64,
    pub vxx: f64,
    pub vxy: f64,
    pub vyy: f64,
}

/// `div(|grad v|^{p-2} grad v)` composed from closed-form derivatives:
/// `|g|^{p-2} [lap + (p-2) <D^2 v g, g>/|g|^2]`. Requires a nonvanishing
/// gradient at the point.
pub fn p_laplacian_exact(d: &Derivs, p: f64) -> f64 {
    let g2 = d.vx * d.vx + d.vy * d.vy;
    assert!(g2 > 0.0, "oracle needs a nonvanishing gradient");
    let lap = d.vxx + d.vyy;
    let second = d.vx * d.vx * d.vxx + 2.0 * d.vx * d.vy * d.vxy + d.vy * d.vy * d.vyy;
    g2.powf((p - 2.0) / 2.0) * (lap + (p - 2.0) * second / g2)
}

/// `v_t - Delta_p v - |grad v|^q` from closed forms.
pub fn pde_residual_exact(d: &Derivs, p: f64, q: f64) -> f64 {
    let g2 = d.vx * d.vx + d.vy * d.vy;
    d.vt - p_laplacian_exact(d, p) - g2.powf(q / 2.0)
}

/// Smooth separable test function `v = (1 + t/2) w(x, y)` with
/// `w = y + 0.3 y^2 + 0.25 x^2 (1 + y)`; its gradient never vanishes for
/// `y >= 0`.
pub fn analytic_test_function(x: f64, y: f64, t: f64) -> Derivs {
    let s = 1.0 + 0.5 * t;
    let w = y + 0.3 * y * y + 0.25 * x * x * (1.0 + y);
    Derivs {
        v: s * w,
        vt: 0.5 * w,
        vx: s * 0.5 * x * (1.0 + y),
        vy: s * (1.0 + 0.6 * y + 0.25 * x * x),
        vxx: s * 0.5 * (1.0 + y),
        vxy: s * 0.5 * x,
        vyy: s * 0.6,
    }
}

/// Paraboloid `(x^2 + y^2)/2`: `Delta_p = p r^{p-2}`, `|grad| = r`.
pub fn paraboloid(x: f64, y: f64) -> Derivs {
    Derivs {
        v: 0.5 * (x * x + y * y),
        vt: 0.0,
        vx: x,
        vy: y,
        vxx: 1.0,
        vxy: 0.0,
        vyy: 1.0,
    }
}

/// Maximum of the torsion function (`-lap V = 1`, zero boundary data) on the
/// unit square, by the double Fourier sine series at the center.
pub fn torsion_max_unit_square() -> f64 {
    let pi = std::f64::consts::PI;
    let mut s = 0.0;
    for m in (1..600u64).step_by(2) {
        for n in (1..600u64).step_by(2) {
            let sm = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 }; // sin(m pi/2) for odd m
            let sn = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            s += 16.0 / pi.powi(4) * sm * sn / ((m * n * (m * m + n * n)) as f64);
        }
    }
    s
}

/// Observed convergence orders from errors at successively halved spacings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
