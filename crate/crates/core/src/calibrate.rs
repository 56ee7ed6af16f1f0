//! Empirical amplitude calibration and sweep expansion.
//!
//! The blow-up threshold in the bump amplitude is not available in closed
//! form; everything downstream is monotone in the amplitude, so a bisection
//! between a non-blowing and a blowing amplitude brackets it.

use crate::config::RunSpec;
use crate::evolution::{run, RunStatus};
use crate::grid::Grid;
use crate::initial::{build_initial_data, InitialDataSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("upper amplitude {a_hi} did not blow up before t_end; widen the bracket")]
    UpperBoundDoesNotBlowUp { a_hi: f64 },
    #[error("probe run failed: {0}")]
    ProbeFailed(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalProbe {
    pub amplitude: f64,
    pub blew_up: bool,
    pub t_final: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    /// Largest probed amplitude that did not blow up.
    pub a_lo: f64,
    /// Smallest probed amplitude that blew up.
    pub a_hi: f64,
    pub probes: Vec<CalProbe>,
}

impl CalibrationOutcome {
    /// Threshold estimate: the bracket midpoint.
    pub fn a_star(&self) -> f64 {
        0.5 * (self.a_lo + self.a_hi)
    }

    pub fn rel_width(&self) -> f64 {
        (self.a_hi - self.a_lo) / self.a_hi
    }
}

/// Runs one probe at the given amplitude and reports whether it terminated in
/// gradient blow-up before `t_end`.
pub fn probe_amplitude(
    spec: &RunSpec,
    grid: &Grid,
    amplitude: f64,
) -> Result<CalProbe, CalibrateError> {
    let init = InitialDataSpec::new(
        spec.initial.eps,
        amplitude,
        spec.params.mu,
        spec.initial.loc_c,
    )
    .map_err(|e| CalibrateError::ProbeFailed(e.to_string()))?;
    let u0 = build_initial_data(&init, grid, &spec.domain, spec.params.exponents())
        .map_err(|e| CalibrateError::ProbeFailed(e.to_string()))?;
    let res = run(&u0, grid, &spec.params, &spec.solver, None)
        .map_err(|e| CalibrateError::ProbeFailed(e.to_string()))?;
    Ok(CalProbe {
        amplitude,
        blew_up: res.status == RunStatus::GradientBlowUp,
        t_final: res.t_final,
    })
}

/// Bisects the blow-up threshold over `(a_lo, a_hi)` to relative bracket width
/// `rel_width` (or the probe budget). `a_lo` is assumed non-blowing and is not
/// probed; `a_hi` is probed first and must blow up.
pub fn calibrate_blowup_amplitude(
    spec: &RunSpec,
    a_lo: f64,
    a_hi: f64,
    rel_width: f64,
    max_probes: usize,
) -> Result<CalibrationOutcome, CalibrateError> {
    assert!(a_hi > a_lo && a_lo >= 0.0);
    let grid = spec
        .grid()
        .map_err(|e| CalibrateError::ProbeFailed(e.to_string()))?;
    let mut probes = Vec::new();
    let first = probe_amplitude(spec, &grid, a_hi)?;
    probes.push(first);
    if !first.blew_up {
        return Err(CalibrateError::UpperBoundDoesNotBlowUp { a_hi });
    }
    let mut lo = a_lo;
    let mut hi = a_hi;
    while (hi - lo) / hi > rel_width && probes.len() < max_probes {
        let mid = 0.5 * (lo + hi);
        let probe = probe_amplitude(spec, &grid, mid)?;
        probes.push(probe);
        if probe.blew_up {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CalibrationOutcome {
        a_lo: lo,
        a_hi: hi,
        probes,
    })
}

/// Cross product of the sweep lists, one RunSpec per combination. Lists that
/// are empty contribute the base value.
pub fn expand_sweep(spec: &RunSpec) -> Vec<RunSpec> {
    let one_f = |v: &Vec<f64>, base: f64| -> Vec<f64> {
        if v.is_empty() {
            vec![base]
        } else {
            v.clone()
        }
    };
    let one_u = |v: &Vec<usize>, base: usize| -> Vec<usize> {
        if v.is_empty() {
            vec![base]
        } else {
            v.clone()
        }
    };
    let mus = one_f(&spec.sweep.mu, spec.params.mu);
    let epss = one_f(&spec.sweep.eps, spec.initial.eps);
    let amps = one_f(&spec.sweep.amplitude, spec.initial.amplitude);
    let ks = one_f(&spec.sweep.k, spec.jdiag.map(|j| j.k).unwrap_or(1.0));
    let nxs = one_u(&spec.sweep.nx, spec.nx);
    let nys = one_u(&spec.sweep.ny, spec.ny);

    let mut out = Vec::new();
    for &mu in &mus {
        for &eps in &epss {
            for &amp in &amps {
                for &k in &ks {
                    for &nx in &nxs {
                        for &ny in &nys {
                            let mut s = spec.clone();
                            s.sweep = Default::default();
                            if let Ok(p) =
                                crate::params::PdeParams::new(spec.params.p, spec.params.q, mu)
                            {
                                s.params = p;
                            } else {
                                continue;
                            }
                            match InitialDataSpec::new(eps, amp, mu, spec.initial.loc_c) {
                                Ok(i) => s.initial = i,
                                Err(_) => continue,
                            }
                            if let Some(j) = s.jdiag {
                                s.jdiag = Some(j.with_k(k));
                            }
                            s.nx = nx;
                            s.ny = ny;
                            out.push(s);
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    #[test]
    fn sweep_expansion_cross_product() {
        let spec = parse_config_str(
            "[pde]\np=3\nq=5\nmu=0.1\n[sweep]\namplitude = 0.5, 1.0\neps = 0.1, 0.2, 0.3\n",
        )
        .unwrap();
        let runs = expand_sweep(&spec);
        assert_eq!(runs.len(), 6);
        assert!(runs.iter().all(|r| r.sweep.is_empty()));
        let amps: Vec<f64> = runs.iter().map(|r| r.initial.amplitude).collect();
        assert!(amps.contains(&0.5) && amps.contains(&1.0));
    }

    #[test]
    fn no_sweep_single_run() {
        let spec = parse_config_str("[pde]\np=3\nq=5\nmu=0.1\n").unwrap();
        assert_eq!(expand_sweep(&spec).len(), 1);
    }
}
