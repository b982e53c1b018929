use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evaluation::{read_results, RunStatus};
use crate::pde::reference::{AllenCahnSolver, ColeHopf, SliceTable};
use crate::pde::{gen_taylor_green, ProblemKind, ProblemParams};
use crate::samplers::{read_snapshots, write_snapshots, Snapshot};
use crate::trainer::Trainer;

/// Default number of Navier–Stokes observation rows.
pub const DEFAULT_OBSERVATION_ROWS: usize = 7000;

/// Lattice of the Burgers reference table: `(nx, nt)` over `[-1, 1] × [0, 1]`.
pub const BURGERS_TABLE: (usize, usize) = (256, 101);

/// Writes the data file of `problem` to `out`.
///
/// Navier–Stokes gets Taylor–Green observations (`rows`, `seed`); Burgers
/// gets its Cole–Hopf table and Allen–Cahn its solver table. Poisson needs no
/// data. Output depends only on the arguments.
pub fn gendata(problem: ProblemKind, params: ProblemParams, out: &Path, seed: u64, rows: Option<usize>) -> Result<()> {
    if rows.is_some() && problem != ProblemKind::NavierStokes {
        return Err(Error::config("--rows only applies to navier_stokes"));
    }
    match problem {
        ProblemKind::NavierStokes => {
            let n = rows.unwrap_or(DEFAULT_OBSERVATION_ROWS);
            if n == 0 {
                return Err(Error::config("--rows must be positive"));
            }
            gen_taylor_green(params.lambda2, n, seed).write_csv(out)
        }
        ProblemKind::Burgers => burgers_table(params.nu)?.write(out),
        ProblemKind::AllenCahn => AllenCahnSolver::new(params.d_ac).solve().write(out),
        ProblemKind::Poisson => Err(Error::config("poisson has a closed-form solution and no data file")),
    }
}

fn burgers_table(nu: f64) -> Result<SliceTable> {
    let (nx, nt) = BURGERS_TABLE;
    let reference = ColeHopf::new(nu);
    let mut values = Vec::with_capacity(nx * nt);
    for k in 0..nt {
        let t = k as f64 / (nt - 1) as f64;
        for i in 0..nx {
            let x = -1.0 + 2.0 * i as f64 / (nx - 1) as f64;
            values.push(reference.eval(x, t)?);
        }
    }
    Ok(SliceTable { x0: -1.0, x1: 1.0, nx, t0: 0.0, t1: 1.0, nt, values })
}

/// Per-event snapshot files of one run.
#[derive(Clone, Debug)]
pub struct SnapshotExport {
    pub run_id: String,
    pub files: Vec<PathBuf>,
    /// Whether the run had to be repeated to record its snapshots.
    pub rerun: bool,
}

/// Splits the snapshots of every run in an experiment directory into one CSV
/// per resampling event under `snapshots/<run_id>/`. Runs trained without
/// snapshots are repeated from their seed with a snapshot at every event.
pub fn export_snapshots(run_dir: &Path) -> Result<Vec<SnapshotExport>> {
    let cfg = ExperimentConfig::load(&run_dir.join("config.json"))?;
    let (_, rows) = read_results(&run_dir.join("results.csv"))?;
    let problem = cfg.build_problem()?;
    let mut exports = Vec::new();
    for (_, row) in rows {
        if row.status == RunStatus::Diverged {
            continue;
        }
        let stored = run_dir.join("snapshots").join(format!("{}.csv", row.run_id));
        let (snapshots, rerun): (Vec<Snapshot>, bool) = if stored.exists() && cfg.snapshot_every == 1 {
            (read_snapshots(&stored)?, false)
        } else {
            log::info!("repeating {} to record snapshots", row.run_id);
            let mut train = cfg.train_config(&problem)?;
            train.snapshot_every = 1;
            (Trainer::new(&problem, train, row.seed)?.run()?.snapshots, true)
        };
        let dir = run_dir.join("snapshots").join(&row.run_id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut files = Vec::with_capacity(snapshots.len());
        for (k, snap) in snapshots.into_iter().enumerate() {
            let path = dir.join(format!("event{k:04}_iter{:06}.csv", snap.iteration));
            write_snapshots(&path, std::slice::from_ref(&snap))?;
            files.push(path);
        }
        exports.push(SnapshotExport { run_id: row.run_id, files, rerun });
    }
    Ok(exports)
}
