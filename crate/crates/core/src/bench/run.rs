use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evaluation::{filter_divergent, write_results, ResultRow, RunRecord, RunStatus};
use crate::pde::PdeProblem;
use crate::samplers::write_snapshots;
use crate::trainer::{write_log, SamplerChoice, TrainConfig, Trainer};

/// Seed offset between consecutive attempts of one seed.
pub const RETRY_SEED_STRIDE: u64 = 10_000;

/// The attempts made for one configured seed.
#[derive(Clone, Debug)]
pub struct SeedRuns {
    pub seed: u64,
    pub attempts: Vec<RunRecord>,
}

impl SeedRuns {
    pub fn last(&self) -> &RunRecord {
        self.attempts.last().expect("every seed runs at least once")
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub seeds: Vec<SeedRuns>,
    /// Configured seeds whose every attempt diverged numerically.
    pub exhausted: Vec<u64>,
    pub output_dir: PathBuf,
}

impl ExperimentOutcome {
    /// Every attempt, in seed order then attempt order.
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.seeds.iter().flat_map(|s| s.attempts.iter())
    }

    /// The last attempt of each seed.
    pub fn final_rows(&self) -> Vec<&ResultRow> {
        self.seeds.iter().map(|s| &s.last().row).collect()
    }
}

pub(crate) fn run_id(cfg: &ExperimentConfig, seed: u64) -> String {
    format!("{}-{}-seed{}", cfg.problem, cfg.sampler.kind, seed)
}

/// Results-row fields that describe the sampler.
fn sampler_columns(sampler: &SamplerChoice) -> (String, Option<f64>, Option<usize>) {
    match sampler {
        SamplerChoice::Pacmann(p) => (p.optimizer.name().to_string(), Some(p.stepsize), Some(p.steps)),
        SamplerChoice::Baseline(_) => (String::new(), None, None),
    }
}

/// Shared state for the runs of one experiment.
pub(crate) struct Runner<'a> {
    pub cfg: &'a ExperimentConfig,
    pub echo: serde_json::Value,
    pub problem: PdeProblem,
    pub train: TrainConfig,
    pub out: &'a Path,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a ExperimentConfig, out: &'a Path) -> Result<Self> {
        cfg.validate()?;
        let resolved = cfg.resolved()?;
        let problem = cfg.build_problem()?;
        let train = cfg.train_config(&problem)?;
        Ok(Runner { cfg, echo: resolved.to_json(), problem, train, out })
    }

    /// Trains one seed and writes its log, checkpoint, and snapshots.
    pub fn run_one(&self, seed: u64, train: &TrainConfig) -> Result<RunRecord> {
        let id = run_id(self.cfg, seed);
        log::info!("starting {id}");
        let outcome = Trainer::new(&self.problem, train.clone(), seed)?.run()?;
        let (point_optimizer, stepsize, num_steps) = sampler_columns(&train.sampler);
        let mut row = ResultRow {
            run_id: id.clone(),
            problem: self.cfg.problem.to_string(),
            sampler: self.cfg.sampler.kind.to_string(),
            point_optimizer,
            stepsize,
            num_steps,
            period: train.schedule.period,
            n_collocation: train.counts.n_r,
            seed,
            status: outcome.status,
            l2: f64::NAN,
            l2_u: None,
            l2_v: None,
            l2_p: None,
            lambda1_relerr: None,
            lambda2_relerr: None,
            wall_time_s: outcome.wall_time_s,
        };
        row.set_errors(&outcome.report);
        if let Some(reason) = &outcome.divergence {
            log::warn!("{id} diverged: {reason}");
        }
        let n_inverse = self.problem.inverse.len();
        write_log(&self.out.join("logs").join(format!("{id}.csv")), &outcome.log, n_inverse)?;
        outcome.state.theta.write_checkpoint(
            &self.problem.net_config(&train.hidden),
            &self.out.join("checkpoints").join(format!("{id}.bin")),
        )?;
        if !outcome.snapshots.is_empty() {
            write_snapshots(&self.out.join("snapshots").join(format!("{id}.csv")), &outcome.snapshots)?;
        }
        log::info!("finished {id}: status {} l2 {:.4e} in {:.1}s", row.status, row.l2, row.wall_time_s);
        Ok(RunRecord { row, final_loss: outcome.final_loss.total, config: self.echo.clone() })
    }
}

fn create_dirs(out: &Path) -> Result<()> {
    for sub in ["", "logs", "checkpoints", "snapshots"] {
        let dir = out.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    Ok(())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(Error::config("jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Runs every seed of `cfg` with up to `jobs` runs at a time and writes the
/// experiment directory. Diverged or filtered runs are replaced by a run on
/// `seed + 10000·attempt` until the retry budget is spent.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutcome> {
    let out = cfg.output_dir.clone();
    let runner = Runner::new(cfg, &out)?;
    create_dirs(&out)?;
    let config_path = out.join("config.json");
    let pretty = serde_json::to_string_pretty(&runner.echo).expect("config serializes");
    fs::write(&config_path, pretty + "\n").map_err(|e| Error::io(&config_path, e))?;

    let pool = thread_pool(jobs)?;
    let n = cfg.seeds.len();
    let mut history: Vec<Vec<RunRecord>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = (0..n).collect();
    let mut attempt = 0u64;
    while !pending.is_empty() {
        let seeds: Vec<(usize, u64)> =
            pending.iter().map(|&i| (i, cfg.seeds[i] + RETRY_SEED_STRIDE * attempt)).collect();
        let done: Vec<Result<RunRecord>> =
            pool.install(|| seeds.par_iter().map(|&(_, s)| runner.run_one(s, &runner.train)).collect());
        for ((i, _), rec) in seeds.into_iter().zip(done) {
            history[i].push(rec?);
        }
        // The cohort is the latest attempt of every seed.
        let mut cohort: Vec<RunRecord> = history.iter().map(|h| h.last().unwrap().clone()).collect();
        for &i in &filter_divergent(&mut cohort, &cfg.eval.filter) {
            log::warn!("{} filtered as an outlier", cohort[i].row.run_id);
            history[i].last_mut().unwrap().row.status = RunStatus::Filtered;
        }
        attempt += 1;
        pending = if attempt as usize > cfg.eval.retries {
            Vec::new()
        } else {
            (0..n).filter(|&i| history[i].last().unwrap().row.status != RunStatus::Ok).collect()
        };
    }

    let exhausted: Vec<u64> = (0..n)
        .filter(|&i| history[i].iter().all(|r| r.row.status == RunStatus::Diverged))
        .map(|i| cfg.seeds[i])
        .collect();
    let seeds: Vec<SeedRuns> =
        cfg.seeds.iter().zip(history).map(|(&seed, attempts)| SeedRuns { seed, attempts }).collect();
    let outcome = ExperimentOutcome { seeds, exhausted, output_dir: out };
    let records: Vec<&RunRecord> = outcome.records().collect();
    write_outputs(&outcome.output_dir, &records)?;
    Ok(outcome)
}

fn write_outputs(out: &Path, records: &[&RunRecord]) -> Result<()> {
    let rows: Vec<(Vec<String>, ResultRow)> = records.iter().map(|r| (Vec::new(), r.row.clone())).collect();
    write_results(&out.join("results.csv"), &[], &rows)?;
    let path = out.join("records.jsonl");
    let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    for r in records {
        let line = serde_json::json!({
            "run_id": r.row.run_id,
            "seed": r.row.seed,
            "status": r.row.status,
            "final_loss": r.final_loss,
            "l2": r.row.l2,
            "config": r.config,
        });
        writeln!(file, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
