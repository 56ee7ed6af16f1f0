//! Run configuration: a sectioned key=value text format with strict unknown-key
//! rejection, defaults for everything except the PDE triple, cross-field
//! revalidation, and canonical re-emission for reproducible manifests.

use crate::evolution::{GradMax, SolverConfig};
use crate::grid::{build_grid, DomainSpec, Grid};
use crate::initial::InitialDataSpec;
use crate::jfunc::JParams;
use crate::ops::HamiltonianScheme;
use crate::params::PdeParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("missing key: {key}")]
    MissingKey { key: String },
    #[error("type mismatch for {key}: expected {expected}, got '{got}'")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        got: String,
    },
    #[error("constraint violation at {key}: {rule}")]
    ConstraintViolation { key: String, rule: String },
    #[error("unknown key: {key}")]
    UnknownKey { key: String },
    #[error("syntax error at line {line}: {text}")]
    Syntax { line: usize, text: String },
}

/// Sweep lists; the cross product expands to independent runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mu: Vec<f64>,
    pub eps: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub k: Vec<f64>,
    pub nx: Vec<usize>,
    pub ny: Vec<usize>,
}

impl SweepSpec {
    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
            && self.eps.is_empty()
            && self.amplitude.is_empty()
            && self.k.is_empty()
            && self.nx.is_empty()
            && self.ny.is_empty()
    }
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub params: PdeParams,
    pub domain: DomainSpec,
    pub nx: usize,
    pub ny: usize,
    pub initial: InitialDataSpec,
    pub solver: SolverConfig,
    /// J-functional monitoring parameters; None disables the per-step monitor.
    pub jdiag: Option<JParams>,
    pub out_dir: PathBuf,
    /// Reserved for future stochastic components; the numerics ignore it.
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl RunSpec {
    pub fn grid(&self) -> Result<Grid, crate::grid::GridError> {
        build_grid(&self.domain, self.nx, self.ny)
    }

    /// Defaults for everything downstream of the PDE triple. `alpha` and
    /// `sigma` adapt so the J-weight constraints hold for any valid `(p, q)`.
    pub fn defaults(params: PdeParams) -> Self {
        let domain = DomainSpec::default();
        let alpha = 1.0 + 0.5f64.min((params.q - params.p) / 2.0);
        let sigma = 0.08f64.min(params.exponents().sigma_max / 2.0);
        let jdiag = JParams::new(1.0, alpha, sigma, domain.x1, domain.y1, &params).ok();
        RunSpec {
            initial: InitialDataSpec::new(0.2, 1.0, params.mu, 0.05).unwrap(),
            params,
            domain,
            nx: 151,
            ny: 251,
            solver: SolverConfig::default(),
            jdiag,
            out_dir: PathBuf::from("runs/out"),
            seed: 0,
            sweep: SweepSpec::default(),
        }
    }
}

type Sections = BTreeMap<String, BTreeMap<String, (String, usize)>>;

fn parse_sections(text: &str) -> Result<Sections, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(ConfigError::Syntax {
                    line: lineno + 1,
                    text: raw.to_string(),
                });
            }
            current = line[1..line.len() - 1].trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(ConfigError::Syntax {
                line: lineno + 1,
                text: raw.to_string(),
            });
        };
        if current.is_empty() {
            return Err(ConfigError::Syntax {
                line: lineno + 1,
                text: format!("key outside any section: {raw}"),
            });
        }
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        sections
            .get_mut(&current)
            .unwrap()
            .insert(key, (value, lineno + 1));
    }
    Ok(sections)
}

struct SectionReader<'a> {
    name: &'a str,
    map: BTreeMap<String, (String, usize)>,
}

impl<'a> SectionReader<'a> {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(v, _)| v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: format!("{}.{}", self.name, key),
                expected: "float",
                got: v,
            }),
        }
    }

    fn f64_required(&mut self, key: &str) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Err(ConfigError::MissingKey {
                key: format!("{}.{}", self.name, key),
            }),
            Some(v) => v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: format!("{}.{}", self.name, key),
                expected: "float",
                got: v,
            }),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: format!("{}.{}", self.name, key),
                expected: "integer",
                got: v,
            }),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(ConfigError::TypeMismatch {
                    key: format!("{}.{}", self.name, key),
                    expected: "bool",
                    got: v,
                }),
            },
        }
    }

    fn list_f64(&mut self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| ConfigError::TypeMismatch {
                        key: format!("{}.{}", self.name, key),
                        expected: "float list",
                        got: v.clone(),
                    })
                })
                .collect(),
        }
    }

    fn list_usize(&mut self, key: &str) -> Result<Vec<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| ConfigError::TypeMismatch {
                        key: format!("{}.{}", self.name, key),
                        expected: "integer list",
                        got: v.clone(),
                    })
                })
                .collect(),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(key) = self.map.keys().next() {
            return Err(ConfigError::UnknownKey {
                key: format!("{}.{}", self.name, key),
            });
        }
        Ok(())
    }
}

const KNOWN_SECTIONS: &[&str] = &[
    "pde", "domain", "grid", "initial", "solver", "jdiag", "output", "sweep",
];

/// Parses and validates the full RunSpec from the sectioned text format.
pub fn parse_config_str(text: &str) -> Result<RunSpec, ConfigError> {
    let mut sections = parse_sections(text)?;
    for name in sections.keys() {
        if !KNOWN_SECTIONS.contains(&name.as_str()) {
            return Err(ConfigError::UnknownKey {
                key: format!("[{name}]"),
            });
        }
    }
    let mut reader = |name: &'static str| SectionReader {
        name,
        map: sections.remove(name).unwrap_or_default(),
    };

    let mut pde = reader("pde");
    let p = pde.f64_required("p")?;
    let q = pde.f64_required("q")?;
    let mu = pde.f64_required("mu")?;
    pde.finish()?;
    let params = PdeParams::new(p, q, mu).map_err(|e| ConfigError::ConstraintViolation {
        key: "pde".into(),
        rule: e.to_string(),
    })?;

    let mut dom = reader("domain");
    let half_width = dom.f64_or("half_width", 1.5)?;
    let height = dom.f64_or("height", 2.5)?;
    let l1 = dom.f64_or("l1", 1.0)?;
    let l2 = dom.f64_or("l2", 1.0)?;
    let rho = dom.f64_or("rho", 0.5)?;
    let x1 = dom.f64_or("x1", 0.75)?;
    let y1 = dom.f64_or("y1", 0.5)?;
    dom.finish()?;
    let domain = DomainSpec::new(half_width, height, l1, l2, rho, x1, y1).map_err(|e| {
        ConfigError::ConstraintViolation {
            key: "domain".into(),
            rule: e.to_string(),
        }
    })?;

    let mut gr = reader("grid");
    let nx = gr.usize_or("nx", 151)?;
    let ny = gr.usize_or("ny", 251)?;
    gr.finish()?;
    build_grid(&domain, nx, ny).map_err(|e| ConfigError::ConstraintViolation {
        key: "grid".into(),
        rule: e.to_string(),
    })?;

    let mut init = reader("initial");
    let eps = init.f64_or("eps", 0.2)?;
    let amplitude = init.f64_or("amplitude", 1.0)?;
    let loc_c = init.f64_or("loc_c", 0.05)?;
    init.finish()?;
    let initial = InitialDataSpec::new(eps, amplitude, params.mu, loc_c).map_err(|e| {
        ConfigError::ConstraintViolation {
            key: "initial".into(),
            rule: e.to_string(),
        }
    })?;
    initial
        .check_support(&domain)
        .map_err(|e| ConfigError::ConstraintViolation {
            key: "initial.eps".into(),
            rule: e.to_string(),
        })?;

    let mut sol = reader("solver");
    let cfl_safety = sol.f64_or("cfl_safety", 0.8)?;
    let dt_min = sol.f64_or("dt_min", 1e-30)?;
    let grad_max = match sol.take("grad_max") {
        None => GradMax::Relative(1000.0),
        Some(v) => v.parse().map_err(|e| ConfigError::TypeMismatch {
            key: "solver.grad_max".into(),
            expected: "threshold ('<float>' or '<float>x')",
            got: format!("{v} ({e})"),
        })?,
    };
    let t_end = sol.f64_or("t_end", 1.0)?;
    let snapshot_every = sol.f64_or("snapshot_every", 0.01)?;
    let hamiltonian = match sol.take("hamiltonian") {
        None => HamiltonianScheme::Central,
        Some(v) => match v.as_str() {
            "central" => HamiltonianScheme::Central,
            "upwind" => HamiltonianScheme::Upwind,
            _ => {
                return Err(ConfigError::TypeMismatch {
                    key: "solver.hamiltonian".into(),
                    expected: "central|upwind",
                    got: v,
                })
            }
        },
    };
    let eta_reg = sol.f64_or("eta_reg", 0.0)?;
    sol.finish()?;
    let solver = SolverConfig {
        cfl_safety,
        dt_min,
        grad_max,
        t_end,
        snapshot_every,
        hamiltonian,
        eta_reg,
    };
    solver
        .validate()
        .map_err(|e| ConfigError::ConstraintViolation {
            key: "solver".into(),
            rule: e.to_string(),
        })?;

    let mut jd = reader("jdiag");
    let j_enabled = jd.bool_or("enabled", true)?;
    let alpha_default = 1.0 + 0.5f64.min((params.q - params.p) / 2.0);
    let sigma_default = 0.08f64.min(params.exponents().sigma_max / 2.0);
    let k = jd.f64_or("k", 1.0)?;
    let alpha = jd.f64_or("alpha", alpha_default)?;
    let sigma = jd.f64_or("sigma", sigma_default)?;
    jd.finish()?;
    let jdiag = if j_enabled {
        Some(
            JParams::new(k, alpha, sigma, domain.x1, domain.y1, &params).map_err(|e| {
                ConfigError::ConstraintViolation {
                    key: "jdiag".into(),
                    rule: e.to_string(),
                }
            })?,
        )
    } else {
        None
    };

    let mut out = reader("output");
    let dir = out.take("dir").unwrap_or_else(|| "runs/out".to_string());
    let seed = out.usize_or("seed", 0)? as u64;
    out.finish()?;

    let mut sw = reader("sweep");
    let sweep = SweepSpec {
        mu: sw.list_f64("mu")?,
        eps: sw.list_f64("eps")?,
        amplitude: sw.list_f64("amplitude")?,
        k: sw.list_f64("k")?,
        nx: sw.list_usize("nx")?,
        ny: sw.list_usize("ny")?,
    };
    sw.finish()?;

    debug_assert!(
        sections.is_empty()
            || sections
                .keys()
                .all(|k| KNOWN_SECTIONS.contains(&k.as_str()))
    );

    Ok(RunSpec {
        params,
        domain,
        nx,
        ny,
        initial,
        solver,
        jdiag,
        out_dir: PathBuf::from(dir),
        seed,
        sweep,
    })
}

pub fn parse_config(path: &Path) -> Result<RunSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Emits the canonical config: every key explicit, stable order, values in
/// round-trip decimal form. Re-parsing yields an equal RunSpec.
pub fn emit_canonical(spec: &RunSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[pde]");
    let _ = writeln!(s, "p = {}", spec.params.p);
    let _ = writeln!(s, "q = {}", spec.params.q);
    let _ = writeln!(s, "mu = {}", spec.params.mu);
    let d = &spec.domain;
    let _ = writeln!(s, "\n[domain]");
    let _ = writeln!(s, "half_width = {}", d.half_width);
    let _ = writeln!(s, "height = {}", d.height);
    let _ = writeln!(s, "l1 = {}", d.l1);
    let _ = writeln!(s, "l2 = {}", d.l2);
    let _ = writeln!(s, "rho = {}", d.rho);
    let _ = writeln!(s, "x1 = {}", d.x1);
    let _ = writeln!(s, "y1 = {}", d.y1);
    let _ = writeln!(s, "\n[grid]");
    let _ = writeln!(s, "nx = {}", spec.nx);
    let _ = writeln!(s, "ny = {}", spec.ny);
    let _ = writeln!(s, "\n[initial]");
    let _ = writeln!(s, "eps = {}", spec.initial.eps);
    let _ = writeln!(s, "amplitude = {}", spec.initial.amplitude);
    let _ = writeln!(s, "loc_c = {}", spec.initial.loc_c);
    let c = &spec.solver;
    let _ = writeln!(s, "\n[solver]");
    let _ = writeln!(s, "cfl_safety = {}", c.cfl_safety);
    let _ = writeln!(s, "dt_min = {}", c.dt_min);
    let _ = writeln!(s, "grad_max = {}", c.grad_max);
    let _ = writeln!(s, "t_end = {}", c.t_end);
    let _ = writeln!(s, "snapshot_every = {}", c.snapshot_every);
    let _ = writeln!(s, "hamiltonian = {}", c.hamiltonian);
    let _ = writeln!(s, "eta_reg = {}", c.eta_reg);
    let _ = writeln!(s, "\n[jdiag]");
    match &spec.jdiag {
        Some(j) => {
            let _ = writeln!(s, "enabled = true");
            let _ = writeln!(s, "k = {}", j.k);
            let _ = writeln!(s, "alpha = {}", j.alpha);
            let _ = writeln!(s, "sigma = {}", j.sigma);
        }
        None => {
            let _ = writeln!(s, "enabled = false");
        }
    }
    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "dir = {}", spec.out_dir.display());
    let _ = writeln!(s, "seed = {}", spec.seed);
    if !spec.sweep.is_empty() {
        let _ = writeln!(s, "\n[sweep]");
        let join_f = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let join_u = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        if !spec.sweep.mu.is_empty() {
            let _ = writeln!(s, "mu = {}", join_f(&spec.sweep.mu));
        }
        if !spec.sweep.eps.is_empty() {
            let _ = writeln!(s, "eps = {}", join_f(&spec.sweep.eps));
        }
        if !spec.sweep.amplitude.is_empty() {
            let _ = writeln!(s, "amplitude = {}", join_f(&spec.sweep.amplitude));
        }
        if !spec.sweep.k.is_empty() {
            let _ = writeln!(s, "k = {}", join_f(&spec.sweep.k));
        }
        if !spec.sweep.nx.is_empty() {
            let _ = writeln!(s, "nx = {}", join_u(&spec.sweep.nx));
        }
        if !spec.sweep.ny.is_empty() {
            let _ = writeln!(s, "ny = {}", join_u(&spec.sweep.ny));
        }
    }
    s
}
