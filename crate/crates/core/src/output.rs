//! Run outputs: manifest, per-step series, snapshots, bottom-edge profiles and
//! diagnostics, all plain CSV/JSON in one directory per run.

use crate::config::{emit_canonical, RunSpec};
use crate::diagnostics::DiagnosticsReport;
use crate::evolution::{RunResult, SERIES_COLUMNS};
use crate::grid::Grid;
use crate::ops::gradient;
use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    crate_version: &'static str,
    status: &'a crate::evolution::RunStatus,
    t_final: f64,
    steps: usize,
    snapshot_count: usize,
    spec: &'a RunSpec,
    /// Re-parsing this text reproduces the run bit for bit on one platform.
    canonical_config: String,
}

fn write_series_csv(res: &RunResult, path: &Path) -> std::io::Result<()> {
    let f = fs::File::create(path)?;
    let mut w = BufWriter::new(f);
    writeln!(w, "# per-step monitors; checks: don1,don3,don4,bernstein")?;
    writeln!(w, "{SERIES_COLUMNS}")?;
    for r in &res.series {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.dt,
            r.max_grad,
            r.argmax_x_bottom,
            r.min_uy,
            r.max_ux_right_half,
            r.bernstein_grad,
            r.bernstein_u,
            r.max_j,
            r.max_ut_abs,
            r.symmetry_defect
        )?;
    }
    w.flush()
}

/// Writes `manifest.json`, `series.csv`, `snapshot_NNNN.csv`,
/// `profile_bottom_NNNN.csv` (one-sided |u_y| along the bottom edge),
/// `j_max.csv` and optionally `diagnostics.json`.
/// Returns the created file paths.
pub fn emit_outputs(
    spec: &RunSpec,
    grid: &Grid,
    res: &RunResult,
    diag: Option<&DiagnosticsReport>,
    dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    let manifest = Manifest {
        schema_version: 1,
        crate_version: env!("CARGO_PKG_VERSION"),
        status: &res.status,
        t_final: res.t_final,
        steps: res.summary.steps,
        snapshot_count: res.snapshots.len(),
        spec,
        canonical_config: emit_canonical(spec),
    };
    let p = dir.join("manifest.json");
    fs::write(&p, serde_json::to_string_pretty(&manifest)?)?;
    files.push(p);

    let p = dir.join("series.csv");
    write_series_csv(res, &p)?;
    files.push(p);

    for (n, snap) in res.snapshots.iter().enumerate() {
        let p = dir.join(format!("snapshot_{n:04}.csv"));
        let f = fs::File::create(&p)?;
        let mut w = BufWriter::new(f);
        snap.write_csv(grid, &mut w)?;
        w.flush()?;
        files.push(p);

        let p = dir.join(format!("profile_bottom_{n:04}.csv"));
        let f = fs::File::create(&p)?;
        let mut w = BufWriter::new(f);
        writeln!(w, "# check: localization; bottom-edge |u_y| at t = {}", snap.time)?;
        writeln!(w, "x,abs_uy")?;
        let g = gradient(snap, grid);
        for i in 0..grid.nx {
            writeln!(w, "{},{}", grid.x(i), g.y[grid.idx(i, 0)].abs())?;
        }
        w.flush()?;
        files.push(p);
    }

    let p = dir.join("j_max.csv");
    let f = fs::File::create(&p)?;
    let mut w = BufWriter::new(f);
    writeln!(w, "# check: J_sign; max J over the corner rectangle per accepted step")?;
    writeln!(w, "t,max_J")?;
    for r in &res.series {
        writeln!(w, "{},{}", r.t, r.max_j)?;
    }
    w.flush()?;
    files.push(p);

    if let Some(d) = diag {
        let p = dir.join("diagnostics.json");
        fs::write(&p, serde_json::to_string_pretty(d)?)?;
        files.push(p);
    }
    Ok(files)
}

/// Serializes a barrier verification bundle alongside run outputs.
pub fn emit_barrier_report<T: Serialize>(report: &T, dir: &Path) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let p = dir.join("barrier_report.json");
    fs::write(&p, serde_json::to_string_pretty(report)?)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use crate::evolution::run;
    use crate::initial::build_initial_data;

    #[test]
    fn emit_and_manifest_reproduces_series() {
        let text = "[pde]\np=3\nq=5\nmu=0.1\n[grid]\nnx=31\nny=51\n[solver]\nt_end=0.004\nsnapshot_every=0.002\n[initial]\namplitude=0.2\n";
        let spec = parse_config_str(text).unwrap();
        let grid = spec.grid().unwrap();
        let u0 = build_initial_data(&spec.initial, &grid, &spec.domain, spec.params.exponents())
            .unwrap();
        let res = run(&u0, &grid, &spec.params, &spec.solver, spec.jdiag.as_ref()).unwrap();
        let dir = std::env::temp_dir().join(format!("gbu_emit_test_{}", std::process::id()));
        let files = emit_outputs(&spec, &grid, &res, None, &dir).unwrap();
        assert!(files.iter().any(|p| p.ends_with("manifest.json")));
        assert!(files.iter().any(|p| p.ends_with("series.csv")));
        // snapshot file count matches the result
        let snaps = files
            .iter()
            .filter(|p| {
                p.file_name()
                    .unwrap()
                    .to_str()
                    .unwrap()
                    .starts_with("snapshot_")
            })
            .count();
        assert_eq!(snaps, res.snapshots.len());

        // re-running from the canonical config in the manifest reproduces series.csv bitwise
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap())
                .unwrap();
        let canon = manifest["canonical_config"].as_str().unwrap();
        let spec2 = parse_config_str(canon).unwrap();
        assert_eq!(spec, spec2);
        let grid2 = spec2.grid().unwrap();
        let u02 = build_initial_data(
            &spec2.initial,
            &grid2,
            &spec2.domain,
            spec2.params.exponents(),
        )
        .unwrap();
        let res2 = run(
            &u02,
            &grid2,
            &spec2.params,
            &spec2.solver,
            spec2.jdiag.as_ref(),
        )
        .unwrap();
        let dir2 = dir.join("rerun");
        emit_outputs(&spec2, &grid2, &res2, None, &dir2).unwrap();
        let a = std::fs::read(dir.join("series.csv")).unwrap();
        let b = std::fs::read(dir2.join("series.csv")).unwrap();
        assert_eq!(a, b);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
