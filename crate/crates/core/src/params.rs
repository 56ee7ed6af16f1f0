//! Problem parameters and the scaling group of the equation
//! `u_t = div(|grad u|^{p-2} grad u) + |grad u|^q`.
//!
//! The standing hypotheses are `q > p > 2` and `mu >= 0`. Everything the rest
//! of the crate derives from `(p, q)` is collected in [`ScalingExponents`] at
//! validation time and carried by value, so no module recomputes an exponent
//! ad hoc.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("rescale factor must be positive, got {0}")]
    NonPositiveEps(f64),
}

/// Exponents generated by the pair `(p, q)`.
///
/// With `kappa = (q-p)/(q-p+1)` and `beta = 1/(q-p+1)`, the flow is invariant
/// under `v -> eps^kappa v(x/eps, (y-eps)/eps, t/eps^time_exp)`, and the PDE
/// residual of a rescaled function picks up the factor `eps^residual_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    /// Amplitude exponent `(q-p)/(q-p+1)`; also the boundary profile exponent
    /// in `u <= C delta^kappa`.
    pub kappa: f64,
    /// Gradient profile exponent `1/(q-p+1)`; `|grad u| <= C delta^{-beta}`.
    pub beta: f64,
    /// Time rescaling exponent `(2q-p)/(q-p+1)`.
    pub time_exp: f64,
    /// Supremum of the admissible weight parameter sigma, `1/(2(q-p+1))`.
    pub sigma_max: f64,
    /// `kappa - time_exp = -q/(q-p+1)`: amplification of the PDE residual
    /// under the scaling map.
    pub residual_exp: f64,
}

impl ScalingExponents {
    fn from_pq(p: f64, q: f64) -> Self {
        let d = q - p + 1.0;
        ScalingExponents {
            kappa: (q - p) / d,
            beta: 1.0 / d,
            time_exp: (2.0 * q - p) / d,
            sigma_max: 1.0 / (2.0 * d),
            residual_exp: -q / d,
        }
    }
}

/// Validated problem parameters `(p, q, mu)` together with their exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeParams {
    pub p: f64,
    pub q: f64,
    /// Boundary slope of the Dirichlet data `u = mu * y`.
    pub mu: f64,
    pub exponents: ScalingExponents,
}

impl PdeParams {
    /// Validates `q > p > 2`, `mu >= 0` and populates the exponents.
    pub fn new(p: f64, q: f64, mu: f64) -> Result<Self, ParamError> {
        if !(p.is_finite() && q.is_finite() && mu.is_finite()) {
            return Err(ParamError::HypothesisViolation(format!(
                "parameters must be finite, got p={p}, q={q}, mu={mu}"
            )));
        }
        if !(p > 2.0) {
            return Err(ParamError::HypothesisViolation(format!(
                "need p > 2, got p={p}"
            )));
        }
        if !(q > p) {
            return Err(ParamError::HypothesisViolation(format!(
                "need q > p, got q={q}, p={p}"
            )));
        }
        if mu < 0.0 {
            return Err(ParamError::HypothesisViolation(format!(
                "need mu >= 0, got mu={mu}"
            )));
        }
        Ok(PdeParams {
            p,
            q,
            mu,
            exponents: ScalingExponents::from_pq(p, q),
        })
    }

    pub fn exponents(&self) -> &ScalingExponents {
        &self.exponents
    }

    /// `mu = 0` is accepted for existence, but the monotonicity and profile
    /// diagnostics require a strictly positive boundary slope and refuse to
    /// run on a degenerate configuration.
    pub fn degenerate(&self) -> bool {
        self.mu == 0.0
    }
}

/// Validates `(p, q, mu)` against the standing hypotheses.
pub fn validate_params(p: f64, q: f64, mu: f64) -> Result<PdeParams, ParamError> {
    PdeParams::new(p, q, mu)
}

/// Pulls an evaluation point of the rescaled function back to the reference
/// frame and applies the amplitude factor: given `(x, y, t)` and the reference
/// value `v` at the pulled-back point, the rescaled function equals
/// `eps^kappa * v` there.
///
/// Returns `((x/eps, (y-eps)/eps, t/eps^time_exp), eps^kappa * value)`.
pub fn rescale_point(
    x: f64,
    y: f64,
    t: f64,
    value: f64,
    eps: f64,
    exps: &ScalingExponents,
) -> Result<((f64, f64, f64), f64), ParamError> {
    if !(eps > 0.0) {
        return Err(ParamError::NonPositiveEps(eps));
    }
    let point = (x / eps, (y - eps) / eps, t / eps.powf(exps.time_exp));
    Ok((point, eps.powf(exps.kappa) * value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accepts_standard_triple() {
        let p = PdeParams::new(3.0, 5.0, 0.1).unwrap();
        assert_eq!(p.p, 3.0);
        assert!(!p.degenerate());
    }

    #[test]
    fn rejects_q_equal_p() {
        assert!(PdeParams::new(3.0, 3.0, 0.1).is_err());
    }

    #[test]
    fn rejects_p_equal_two() {
        assert!(PdeParams::new(2.0, 4.0, 0.1).is_err());
    }

    #[test]
    fn rejects_negative_mu_accepts_zero() {
        assert!(PdeParams::new(3.0, 5.0, -0.1).is_err());
        let p = PdeParams::new(3.0, 5.0, 0.0).unwrap();
        assert!(p.degenerate());
    }

    #[test]
    fn exponents_p3_q5() {
        let e = PdeParams::new(3.0, 5.0, 0.1).unwrap().exponents;
        assert!((e.kappa - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.beta - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.time_exp - 7.0 / 3.0).abs() < 1e-15);
        assert!((e.sigma_max - 1.0 / 6.0).abs() < 1e-15);
        assert!((e.residual_exp + 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exponents_p4_q6() {
        let e = PdeParams::new(4.0, 6.0, 0.1).unwrap().exponents;
        assert!((e.kappa - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.beta - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.time_exp - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rescale_eps_one_is_a_shift() {
        let e = PdeParams::new(3.0, 5.0, 0.1).unwrap().exponents;
        let ((x, y, t), v) = rescale_point(0.3, 0.75, 2.0, 5.0, 1.0, &e).unwrap();
        assert_eq!((x, y, t), (0.3, -0.25, 2.0));
        assert_eq!(v, 5.0);
    }

    #[test]
    fn rescale_rejects_nonpositive_eps() {
        let e = PdeParams::new(3.0, 5.0, 0.1).unwrap().exponents;
        assert!(rescale_point(0.0, 0.0, 0.0, 1.0, 0.0, &e).is_err());
        assert!(rescale_point(0.0, 0.0, 0.0, 1.0, -0.5, &e).is_err());
    }

    proptest! {
        // kappa + beta = 1, time_exp = kappa + q*beta, time_exp > 2,
        // sigma_max = beta/2, residual_exp = kappa - time_exp; all to 1e-14.
        #[test]
        fn exponent_identities(p in 2.001f64..8.0, dq in 0.01f64..6.0) {
            let q = p + dq;
            let e = PdeParams::new(p, q, 0.1).unwrap().exponents;
            prop_assert!((e.kappa + e.beta - 1.0).abs() < 1e-14);
            prop_assert!((e.time_exp - (e.kappa + q * e.beta)).abs() < 1e-14);
            prop_assert!((e.time_exp - (2.0 + (p - 2.0) * e.beta)).abs() < 1e-14);
            prop_assert!(e.time_exp > 2.0);
            prop_assert!((e.sigma_max - e.beta / 2.0).abs() < 1e-14);
            prop_assert!((e.residual_exp - (e.kappa - e.time_exp)).abs() < 1e-14);
            prop_assert!(e.kappa > 0.0 && e.kappa < 1.0);
            prop_assert!(e.beta > 0.0 && e.beta < 1.0);
        }
    }
}
