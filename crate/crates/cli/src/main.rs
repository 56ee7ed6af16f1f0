//! Command-line driver: simulate, verify barriers, diagnose, calibrate,
//! sweep and selftest.
//!
//! Exit codes: 0 success, 1 diagnostic failure, 2 configuration error,
//! 3 numerical divergence.

use clap::{Args, Parser, Subcommand};
use gbu_core::barriers;
use gbu_core::calibrate::{calibrate_blowup_amplitude, expand_sweep};
use gbu_core::config::{parse_config, RunSpec};
use gbu_core::diagnostics::diagnose;
use gbu_core::evolution::{run, GradMax, RunResult};
use gbu_core::grid::Grid;
use gbu_core::initial::{build_initial_data, validate_initial_data};
use gbu_core::output::{emit_barrier_report, emit_outputs};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

const EXIT_DIAGNOSTIC: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "gbu", version, about = "Boundary gradient blow-up laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (sectioned key=value format).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gradient blow-up threshold override: absolute ('85') or relative ('1000x').
    #[arg(long)]
    grad_max: Option<String>,
    /// Time horizon override.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow and write run outputs.
    Simulate(CommonArgs),
    /// Solve the auxiliary elliptic problem, assemble the stationary barrier,
    /// locate mu0 and map the moving-barrier validity region.
    VerifyBarriers(CommonArgs),
    /// Simulate, then evaluate the full diagnostics suite.
    Diagnose(CommonArgs),
    /// Bisect the blow-up amplitude threshold.
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Lower amplitude (assumed non-blowing).
        #[arg(long, default_value_t = 0.0)]
        a_lo: f64,
        /// Upper amplitude (must blow up).
        #[arg(long, default_value_t = 8.0)]
        a_hi: f64,
    },
    /// Expand [sweep] lists into independent runs.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Concurrent workers.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Fast internal consistency checks (no config needed).
    Selftest,
}

fn load_spec(common: &CommonArgs) -> Result<RunSpec, String> {
    let mut spec = parse_config(&common.config).map_err(|e| e.to_string())?;
    if let Some(out) = &common.out {
        spec.out_dir = out.clone();
    }
    if let Some(gm) = &common.grad_max {
        spec.solver.grad_max = gm.parse::<GradMax>().map_err(|e| e.to_string())?;
    }
    if let Some(t) = common.t_end {
        spec.solver.t_end = t;
    }
    spec.solver.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn simulate_spec(spec: &RunSpec) -> Result<(Grid, gbu_core::Field, RunResult), (u8, String)> {
    let grid = spec.grid().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let u0 = build_initial_data(&spec.initial, &grid, &spec.domain, spec.params.exponents())
        .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let report = validate_initial_data(
        &u0,
        &spec.initial,
        &spec.domain,
        &grid,
        spec.params.exponents(),
    );
    for c in report.conditions() {
        if !c.pass {
            eprintln!(
                "note: initial-data condition {} fails (margin {:.3e})",
                c.anchor, c.margin
            );
        }
    }
    let res = run(&u0, &grid, &spec.params, &spec.solver, spec.jdiag.as_ref())
        .map_err(|e| (EXIT_DIVERGED, e.to_string()))?;
    Ok((grid, u0, res))
}

fn print_run_summary(res: &RunResult) {
    let s = &res.summary;
    println!(
        "status: {:?}  t_final = {:.6}  steps = {}  snapshots = {}",
        res.status,
        res.t_final,
        s.steps,
        res.snapshots.len()
    );
    println!(
        "initial max|grad u| = {:.4}, threshold = {:.4}, final max|grad u| = {:.4}",
        s.initial_max_grad,
        s.grad_threshold,
        res.series
            .last()
            .map(|r| r.max_grad)
            .unwrap_or(s.initial_max_grad)
    );
}

fn cmd_simulate(common: &CommonArgs) -> Result<u8, (u8, String)> {
    let spec = load_spec(common).map_err(|e| (EXIT_CONFIG, e))?;
    let (grid, _, res) = simulate_spec(&spec)?;
    print_run_summary(&res);
    emit_outputs(&spec, &grid, &res, None, &spec.out_dir)
        .map_err(|e| (EXIT_DIVERGED, format!("write outputs: {e}")))?;
    println!("outputs in {}", spec.out_dir.display());
    Ok(0)
}

fn cmd_diagnose(common: &CommonArgs) -> Result<u8, (u8, String)> {
    let spec = load_spec(common).map_err(|e| (EXIT_CONFIG, e))?;
    let (grid, u0, res) = simulate_spec(&spec)?;
    print_run_summary(&res);
    let jp = spec
        .jdiag
        .ok_or((EXIT_CONFIG, "diagnose requires [jdiag] enabled".to_string()))?;
    let report = diagnose(
        &res,
        &u0,
        &grid,
        &spec.params,
        &spec.domain,
        &jp,
        spec.solver.hamiltonian,
    )
    .map_err(|e| (EXIT_DIAGNOSTIC, e.to_string()))?;
    emit_outputs(&spec, &grid, &res, Some(&report), &spec.out_dir)
        .map_err(|e| (EXIT_DIVERGED, format!("write outputs: {e}")))?;
    let sym = &report.symmetry;
    println!(
        "don3 symmetry defect {:.2e} [{}]  don4 max u_x {:.2e} [{}]  don1 min u_y {:.4} vs {:.4} [{}]",
        sym.max_defect,
        pass_str(sym.pass_symmetry),
        sym.max_ux_right_half,
        pass_str(sym.pass_ux),
        sym.min_uy,
        sym.uy_floor,
        pass_str(sym.pass_uy)
    );
    println!(
        "u_t bound: max |u_t| = {:.4e} vs C1 = {:.4e} [{}]",
        report.ut_bound.max_abs_ut,
        report.ut_bound.c_tilde_1,
        pass_str(report.ut_bound.pass)
    );
    println!(
        "bernstein: m_grad {:.4} -> {:.4} [{}], m_u {:.4} -> {:.4} [{}]",
        report.bernstein.m_grad_half,
        report.bernstein.m_grad_final,
        pass_str(report.bernstein.pass_grad_ratio),
        report.bernstein.m_u_half,
        report.bernstein.m_u_final,
        pass_str(report.bernstein.pass_u_ratio)
    );
    if let Some(l) = &report.localization {
        println!(
            "localization: centered argmax fraction {:.2} [{}], center x{:.1} / off-center x{:.2} [{}], width {:.3} -> {:.3} [{}]",
            l.argmax_at_center_fraction,
            pass_str(l.pass_argmax),
            l.center_growth,
            l.off_center_growth,
            pass_str(l.pass_off_center),
            l.width_half,
            l.width_final,
            pass_str(l.pass_width)
        );
    }
    if let Some(j) = &report.j_sign {
        match j.k_found {
            Some(k) => println!("J sign: k = {k:.6e}, max J = {:.3e} [PASS]", j.max_j_at_k),
            None => println!("J sign: inconclusive (no admissible k >= 1e-6) [FAIL]"),
        }
    }
    if let Some(c) = &report.corner {
        println!(
            "corner separation at t = {:.4}: {:.4e} at (x, y) = ({:.3}, {:.3}) [{}]",
            c.snapshot_time,
            c.value,
            c.witness_xy.0,
            c.witness_xy.1,
            pass_str(c.pass)
        );
    }
    if let Some(w) = &report.weighted_profile {
        println!(
            "weighted profile: {:.4} -> {:.4} (ratio {:.2}) [{}]",
            w.half,
            w.final_,
            w.ratio,
            pass_str(w.pass)
        );
    }
    println!("diagnostics in {}", spec.out_dir.display());
    Ok(if report.all_pass() {
        0
    } else {
        EXIT_DIAGNOSTIC
    })
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_verify_barriers(common: &CommonArgs) -> Result<u8, (u8, String)> {
    let spec = load_spec(common).map_err(|e| (EXIT_CONFIG, e))?;
    let grid = spec.grid().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let bundle = barriers::find_global_barrier(&grid, &spec.params, spec.domain.rho)
        .map_err(|e| (EXIT_DIAGNOSTIC, e.to_string()))?;
    println!(
        "elliptic solve: {} iterations, relative residual {:.2e}",
        bundle.solve.iterations, bundle.solve.rel_residual
    );
    println!(
        "global barrier: eps_v = {:.5e}, mu0_found = {:.6}, min residual = {:.3e} at {:?}",
        bundle.eps_v, bundle.mu0_found, bundle.residual.min, bundle.residual.witness_xy
    );
    let exps = spec.params.exponents();
    let scan = barriers::scan_nondeg_region(
        &spec.params,
        0.2,
        0.4,
        spec.domain.x1,
        0.0,
        1.0,
        (1e-4, 1.0),
        (1e-4, 10.0),
        9,
    );
    let valid: Vec<_> = scan.iter().filter(|(_, _, m)| *m >= 0.0).collect();
    println!(
        "moving barrier (beta = {:.4}): {} of {} sampled (eps, eta) pairs admissible",
        exps.beta,
        valid.len(),
        scan.len()
    );
    if let Some((e, n, m)) = valid.iter().max_by(|a, b| a.2.partial_cmp(&b.2).unwrap()) {
        println!("best pair: eps = {e:.3e}, eta = {n:.3e}, min residual = {m:.3e}");
    }
    #[derive(serde::Serialize)]
    struct FullReport<'a> {
        mu0_found: f64,
        eps_v: f64,
        min_residual: f64,
        witness_node: (usize, usize),
        samples: usize,
        elliptic: &'a barriers::EllipticSolveReport,
        nondeg_scan: &'a [(f64, f64, f64)],
    }
    let report = FullReport {
        mu0_found: bundle.mu0_found,
        eps_v: bundle.eps_v,
        min_residual: bundle.residual.min,
        witness_node: bundle.residual.witness_node,
        samples: bundle.residual.samples,
        elliptic: &bundle.solve,
        nondeg_scan: &scan,
    };
    let path = emit_barrier_report(&report, &spec.out_dir)
        .map_err(|e| (EXIT_DIVERGED, format!("write report: {e}")))?;
    println!("report in {}", path.display());
    let ok = bundle.mu0_found > 0.0 && bundle.residual.min >= -1e-8 && !valid.is_empty();
    Ok(if ok { 0 } else { EXIT_DIAGNOSTIC })
}

fn cmd_calibrate(common: &CommonArgs, a_lo: f64, a_hi: f64) -> Result<u8, (u8, String)> {
    let spec = load_spec(common).map_err(|e| (EXIT_CONFIG, e))?;
    let outcome = calibrate_blowup_amplitude(&spec, a_lo, a_hi, 0.05, 20)
        .map_err(|e| (EXIT_DIAGNOSTIC, e.to_string()))?;
    println!(
        "threshold bracket: [{:.5}, {:.5}] (relative width {:.3})",
        outcome.a_lo,
        outcome.a_hi,
        outcome.rel_width()
    );
    for p in &outcome.probes {
        println!(
            "  amplitude {:.5}: {} (t_final = {:.5})",
            p.amplitude,
            if p.blew_up { "blow-up" } else { "no blow-up" },
            p.t_final
        );
    }
    std::fs::create_dir_all(&spec.out_dir)
        .and_then(|_| {
            std::fs::write(
                spec.out_dir.join("calibration.json"),
                serde_json::to_string_pretty(&outcome).unwrap(),
            )
        })
        .map_err(|e| (EXIT_DIVERGED, format!("write calibration: {e}")))?;
    Ok(0)
}

fn cmd_sweep(common: &CommonArgs, workers: usize) -> Result<u8, (u8, String)> {
    let spec = load_spec(common).map_err(|e| (EXIT_CONFIG, e))?;
    let runs = expand_sweep(&spec);
    println!("sweep: {} runs, {} workers", runs.len(), workers.max(1));
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::<String>::new());
    let lines = Mutex::new(Vec::<(usize, String)>::new());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= runs.len() {
                    break;
                }
                let mut sub = runs[i].clone();
                sub.out_dir = spec.out_dir.join(format!("sweep_{i:03}"));
                let line = match simulate_spec(&sub) {
                    Ok((grid, _, res)) => {
                        let _ = emit_outputs(&sub, &grid, &res, None, &sub.out_dir);
                        format!(
                            "run {i:03}: mu={} eps={} amplitude={} grid={}x{} -> {:?} at t={:.6}",
                            sub.params.mu,
                            sub.initial.eps,
                            sub.initial.amplitude,
                            sub.nx,
                            sub.ny,
                            res.status,
                            res.t_final
                        )
                    }
                    Err((_, e)) => {
                        failures.lock().unwrap().push(format!("run {i:03}: {e}"));
                        format!("run {i:03}: FAILED ({e})")
                    }
                };
                lines.lock().unwrap().push((i, line));
            });
        }
    });
    let mut lines = lines.into_inner().unwrap();
    lines.sort_by_key(|(i, _)| *i);
    for (_, l) in lines {
        println!("{l}");
    }
    let failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        Ok(0)
    } else {
        Err((EXIT_DIVERGED, failures.join("; ")))
    }
}

fn cmd_selftest() -> u8 {
    use gbu_core::grid::{build_grid, DomainSpec, Field};
    use gbu_core::ops::p_laplacian;
    use gbu_core::params::PdeParams;
    let mut ok = true;

    // exponent identities
    let params = PdeParams::new(3.0, 5.0, 0.1).unwrap();
    let e = params.exponents();
    let ids = (e.kappa + e.beta - 1.0).abs() < 1e-14
        && (e.time_exp - (e.kappa + 5.0 * e.beta)).abs() < 1e-14;
    println!("exponent identities: {}", pass_str(ids));
    ok &= ids;

    // discrete p-Laplacian against the closed form on the paraboloid
    let domain = DomainSpec::default();
    let grid = build_grid(&domain, 121, 201).unwrap();
    let u = Field::from_fn(&grid, 0.0, |x, y| 0.5 * (x * x + y * y));
    let pl = p_laplacian(&u, &grid, 3.0);
    let j = (1.0 / grid.hy).round() as usize;
    let got = pl.at(&grid, grid.center_ix(), j);
    let consistent = (got - 3.0).abs() < 2e-3;
    println!(
        "p-Laplacian closed-form check at r = 1: {got:.6} vs 3 [{}]",
        pass_str(consistent)
    );
    ok &= consistent;

    // unit-square torsion oracle
    let square = DomainSpec::new(0.5, 1.0, 0.45, 0.45, 0.2, 0.3, 0.4).unwrap();
    let sgrid = build_grid(&square, 101, 101).unwrap();
    let (v, rep) = barriers::solve_elliptic(&sgrid, 2.0, |_, _| 0.0, 1e-10).unwrap();
    let torsion_ok = (v.max() - 0.073671).abs() < 1e-3 && rep.rel_residual <= 1e-10;
    println!(
        "unit-square torsion maximum: {:.6} vs 0.073671 [{}]",
        v.max(),
        pass_str(torsion_ok)
    );
    ok &= torsion_ok;

    if ok {
        0
    } else {
        EXIT_DIAGNOSTIC
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(c) => cmd_simulate(c),
        Command::Diagnose(c) => cmd_diagnose(c),
        Command::VerifyBarriers(c) => cmd_verify_barriers(c),
        Command::Calibrate { common, a_lo, a_hi } => cmd_calibrate(common, *a_lo, *a_hi),
        Command::Sweep { common, workers } => cmd_sweep(common, *workers),
        Command::Selftest => Ok(cmd_selftest()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
