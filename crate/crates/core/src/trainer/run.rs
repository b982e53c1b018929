use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::lbfgs::{IterationInfo, Lbfgs, LbfgsConfig, StepKind};
use super::loss::{compute_loss, LossBreakdown, LossData, LossWeights, Supervised};
use super::schedule::{SamplerChoice, TrainSchedule};
use crate::error::{Error, Result};
use crate::evaluation::{ErrorReport, Evaluator, RunStatus};
use crate::network::{Mlp, MlpConfig, ParameterVector};
use crate::pacmann::pacmann_move;
use crate::pde::{PdeProblem, PointCounts, ResidualLandscape};
use crate::samplers::{
    hammersley, rad_resample, rar_step, rard_step, resample_random, uniform_grid, BaselineKind, CollocationSet,
    Snapshot,
};
use crate::seed::{derive_seed, stream};

/// Everything that defines a run apart from the problem and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub counts: PointCounts,
    pub schedule: TrainSchedule,
    pub sampler: SamplerChoice,
    pub weights: LossWeights,
    pub lbfgs: LbfgsConfig,
    /// Iterations between log rows.
    pub log_every: usize,
    /// Take a snapshot before every `k`-th event; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl TrainConfig {
    /// Registry counts and network with the given schedule and sampler.
    pub fn for_problem(problem: &PdeProblem, schedule: TrainSchedule, sampler: SamplerChoice) -> Self {
        TrainConfig {
            hidden: problem.default_hidden.clone(),
            counts: problem.counts,
            schedule,
            sampler,
            weights: LossWeights::default(),
            lbfgs: LbfgsConfig::default(),
            log_every: 100,
            snapshot_every: 0,
        }
    }

    pub fn validate(&self, problem: &PdeProblem) -> Result<()> {
        self.schedule.validate()?;
        self.weights.validate()?;
        self.lbfgs.validate()?;
        self.sampler.validate(self.counts.n_r)?;
        if self.sampler.period() != self.schedule.period {
            return Err(Error::config(format!(
                "sampler period {} differs from schedule period {}",
                self.sampler.period(),
                self.schedule.period
            )));
        }
        if self.log_every == 0 {
            return Err(Error::config("log_every must be at least 1"));
        }
        let c = &self.counts;
        if c.n_r == 0 || c.n_bc == 0 {
            return Err(Error::config("N_r and N_bc must be positive"));
        }
        if problem.initial.is_some() && c.n_ic == 0 {
            return Err(Error::config(format!("{} needs N_ic > 0", problem.name())));
        }
        if problem.initial.is_none() && c.n_ic > 0 {
            return Err(Error::config(format!("{} has no initial condition; N_ic must be 0", problem.name())));
        }
        if !problem.inverse.is_empty() && c.n_ref == 0 {
            return Err(Error::config(format!("{} needs observations (N_ref > 0)", problem.name())));
        }
        if problem.inverse.is_empty() && c.n_ref > 0 {
            return Err(Error::config(format!("{} takes no observations; N_ref must be 0", problem.name())));
        }
        problem.net_config(&self.hidden).validate()
    }
}

/// Optimizer currently driving θ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Adam,
    Lbfgs,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Adam => "adam",
            Phase::Lbfgs => "lbfgs",
        }
    }
}

/// Mutable state of a run.
#[derive(Clone, Debug)]
pub struct TrainState {
    pub theta: ParameterVector,
    /// Optimizer iterations completed, Adam and L-BFGS together.
    pub iteration: usize,
    pub adam: Adam,
    pub lbfgs: Lbfgs,
    pub collocation: CollocationSet,
    /// Resampling events completed; with the run seed this fixes every event's random stream.
    pub events: usize,
    pub seed: u64,
}

/// One training-log line.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub iteration: usize,
    pub phase: Phase,
    pub loss: LossBreakdown,
    pub l2: f64,
    pub lambdas: Vec<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the training log; λ columns appear when `n_inverse > 0`.
pub fn write_log(path: &Path, rows: &[LogRow], n_inverse: usize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "iteration,phase,loss_total,loss_r,loss_ic,loss_bc,loss_ref,l2_error").map_err(io)?;
    for k in 0..n_inverse {
        write!(w, ",lambda{}", k + 1).map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for r in rows {
        write!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            r.phase.as_str(),
            r.loss.total,
            r.loss.r,
            opt(r.loss.ic),
            r.loss.bc,
            opt(r.loss.reference),
            r.l2
        )
        .map_err(io)?;
        for l in &r.lambdas {
            write!(w, ",{l}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Result of [`Trainer::run`].
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub state: TrainState,
    pub status: RunStatus,
    /// Why the run diverged, if it did.
    pub divergence: Option<String>,
    pub final_loss: LossBreakdown,
    pub report: ErrorReport,
    pub log: Vec<LogRow>,
    pub snapshots: Vec<Snapshot>,
    pub lbfgs_fallbacks: usize,
    pub wall_time_s: f64,
}

/// Drives one run through its blocks.
///
/// Adam iterations and resampling events alternate inside the Adam phase of
/// each block; the L-BFGS phase that follows uses the collocation set as the
/// last event left it.
pub struct Trainer<'a> {
    problem: &'a PdeProblem,
    cfg: TrainConfig,
    mlp: Mlp,
    data: LossData,
    evaluator: Evaluator,
    state: TrainState,
    phase: Phase,
    initial_layout: CollocationSet,
    snapshots: Vec<Snapshot>,
}

fn initial_layout(problem: &PdeProblem, sampler: &SamplerChoice, n_r: usize, seed: u64) -> CollocationSet {
    let domain = &problem.domain;
    match sampler {
        SamplerChoice::Baseline(b) => match b.kind {
            BaselineKind::UniformGrid => uniform_grid(n_r, domain),
            BaselineKind::RandomResample => resample_random(n_r, domain, derive_seed(seed, stream::COLLOCATION, 0)),
            BaselineKind::Hammersley | BaselineKind::Rar | BaselineKind::Rad | BaselineKind::RarD => {
                hammersley(n_r, domain)
            }
        },
        SamplerChoice::Pacmann(_) => hammersley(n_r, domain),
    }
}

impl<'a> Trainer<'a> {
    pub fn new(problem: &'a PdeProblem, cfg: TrainConfig, seed: u64) -> Result<Self> {
        cfg.validate(problem)?;
        let evaluator = Evaluator::new(problem)?;
        Self::with_evaluator(problem, cfg, seed, evaluator)
    }

    /// As [`Trainer::new`] with a precomputed evaluation set.
    pub fn with_evaluator(problem: &'a PdeProblem, cfg: TrainConfig, seed: u64, evaluator: Evaluator) -> Result<Self> {
        cfg.validate(problem)?;
        let net: MlpConfig = problem.net_config(&cfg.hidden);
        let mlp = Mlp::new(net.clone())?;
        let initial: Vec<f64> = problem.inverse.iter().map(|s| s.initial).collect();
        let theta = ParameterVector::glorot(&net, derive_seed(seed, stream::INIT, 0)).with_inverse(&initial);

        let counts = cfg.counts;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::BOUNDARY, 0));
        let points = problem.sample_boundary(counts.n_bc, &mut rng);
        let boundary = Supervised { targets: problem.targets(&problem.boundary, &points), points };
        let initial = match &problem.initial {
            Some(h) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::INITIAL, 0));
                let points = problem.sample_initial(counts.n_ic, &mut rng);
                Some(Supervised { targets: problem.targets(h, &points), points })
            }
            None => None,
        };
        let reference = problem
            .observations(counts.n_ref, derive_seed(seed, stream::OBSERVATION, 0))?
            .map(|(points, targets)| Supervised { points, targets });

        let collocation = initial_layout(problem, &cfg.sampler, counts.n_r, seed);
        let n = theta.len();
        let state = TrainState {
            theta,
            iteration: 0,
            adam: Adam::new(n),
            lbfgs: Lbfgs::new(cfg.lbfgs),
            collocation: collocation.clone(),
            events: 0,
            seed,
        };
        Ok(Trainer {
            problem,
            cfg,
            mlp,
            data: LossData { boundary, initial, reference },
            evaluator,
            state,
            phase: Phase::Adam,
            initial_layout: collocation,
            snapshots: Vec::new(),
        })
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn data(&self) -> &LossData {
        &self.data
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Loss at the current state, optionally with its gradient.
    pub fn loss(&self, with_grad: bool) -> Result<super::loss::LossEval> {
        compute_loss(
            self.problem,
            &self.mlp,
            &self.state.theta,
            self.state.collocation.points(),
            &self.data,
            &self.cfg.weights,
            with_grad,
        )
    }

    pub fn report(&self) -> Result<ErrorReport> {
        self.evaluator.report(&self.mlp, &self.state.theta)
    }

    /// Switches optimizer. Entering the Adam phase starts a block and clears the L-BFGS history.
    pub fn set_phase(&mut self, phase: Phase) {
        if phase == Phase::Adam && self.phase == Phase::Lbfgs {
            self.state.lbfgs.clear();
        }
        self.phase = phase;
    }

    /// One full-batch Adam step. Returns the loss at the pre-step parameters.
    pub fn adam_iteration(&mut self) -> Result<LossBreakdown> {
        if self.phase != Phase::Adam {
            return Err(Error::config("Adam iteration requested during the L-BFGS phase"));
        }
        let eval = self.loss(true)?;
        let lr = self.cfg.schedule.adam_lr;
        self.state.adam.step(self.state.theta.as_mut_slice(), &eval.grad, lr);
        self.state.iteration += 1;
        if !self.state.theta.is_finite() {
            return Err(Error::numeric(
                "non-finite parameters after Adam step",
                format!("iteration {}", self.state.iteration),
            ));
        }
        Ok(eval.breakdown)
    }

    /// One L-BFGS iteration on the frozen collocation set.
    pub fn lbfgs_iteration(&mut self, f: &mut f64, g: &mut Vec<f64>) -> Result<IterationInfo> {
        if self.phase != Phase::Lbfgs {
            return Err(Error::config("L-BFGS iteration requested during the Adam phase"));
        }
        let n_inverse = self.state.theta.n_inverse();
        let mut x = self.state.theta.as_slice().to_vec();
        let (problem, mlp, data, weights) = (self.problem, &self.mlp, &self.data, &self.cfg.weights);
        let points = self.state.collocation.points();
        let mut objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let theta = ParameterVector::new(x.to_vec(), n_inverse)?;
            let e = compute_loss(problem, mlp, &theta, points, data, weights, true)?;
            Ok((e.breakdown.total, e.grad))
        };
        let info = self.state.lbfgs.step(&mut x, f, g, &mut objective)?;
        self.state.theta = ParameterVector::new(x, n_inverse)?;
        self.state.iteration += 1;
        Ok(info)
    }

    /// One resampling event. Only the collocation set changes.
    pub fn resample(&mut self) -> Result<()> {
        if self.phase != Phase::Adam {
            return Err(Error::config("resampling is only allowed during the Adam phase"));
        }
        let k = self.state.events as u64;
        let seed = self.state.seed;
        let every = self.cfg.snapshot_every;
        if every > 0 && self.state.events.is_multiple_of(every) {
            self.snapshots.push(Snapshot { iteration: self.state.iteration, set: self.state.collocation.clone() });
        }
        let domain = &self.problem.domain;
        let event_seed = derive_seed(seed, stream::EVENT, k);
        let landscape = ResidualLandscape {
            op: self.problem.residual.as_ref(),
            field: &self.mlp,
            theta: self.state.theta.network(),
            inverse: self.state.theta.inverse(),
        };
        let n_r = self.cfg.counts.n_r;
        let next = match &self.cfg.sampler {
            SamplerChoice::Pacmann(p) => {
                Some(pacmann_move(&self.state.collocation, domain, &landscape, p, event_seed)?)
            }
            SamplerChoice::Baseline(b) => {
                let pool = || resample_random(b.pool_size(n_r), domain, derive_seed(seed, stream::POOL, k));
                match b.kind {
                    BaselineKind::UniformGrid | BaselineKind::Hammersley => {
                        assert!(self.state.collocation == self.initial_layout, "static collocation set was mutated");
                        None
                    }
                    BaselineKind::RandomResample => Some(resample_random(n_r, domain, event_seed)),
                    BaselineKind::Rar => {
                        let pool = pool();
                        let r = landscape.residual_norms(pool.points())?;
                        Some(rar_step(&self.state.collocation, pool.points(), &r, b.rar_add)?)
                    }
                    BaselineKind::Rad => {
                        let pool = pool();
                        let r = landscape.residual_norms(pool.points())?;
                        Some(rad_resample(n_r, domain.dim(), pool.points(), &r, b.rad_k, b.rad_c, event_seed)?)
                    }
                    BaselineKind::RarD => {
                        let pool = pool();
                        let r = landscape.residual_norms(pool.points())?;
                        Some(rard_step(
                            &self.state.collocation,
                            pool.points(),
                            &r,
                            b.rar_add,
                            b.rad_k,
                            b.rad_c,
                            event_seed,
                        )?)
                    }
                }
            }
        };
        if let Some(set) = next {
            set.validate(domain)?;
            self.state.collocation = set;
        }
        self.state.events += 1;
        Ok(())
    }

    fn log_row(&self) -> Result<LogRow> {
        let loss = self.loss(false)?.breakdown;
        let report = self.report()?;
        Ok(LogRow {
            iteration: self.state.iteration,
            phase: self.phase,
            loss,
            l2: report.l2,
            lambdas: self.state.theta.inverse().to_vec(),
        })
    }

    fn run_blocks(&mut self, log: &mut Vec<LogRow>, fallbacks: &mut usize) -> Result<()> {
        let s = self.cfg.schedule;
        let every = self.cfg.log_every;
        log.push(self.log_row()?);
        for _ in 0..s.blocks {
            self.set_phase(Phase::Adam);
            for j in 1..=s.adam_iters {
                self.adam_iteration()?;
                if self.state.iteration.is_multiple_of(every) || j == s.adam_iters {
                    log.push(self.log_row()?);
                }
                if j % s.period == 0 {
                    self.resample()?;
                }
            }
            self.set_phase(Phase::Lbfgs);
            let block_end = self.state.iteration + s.lbfgs_iters;
            if s.lbfgs_iters > 0 {
                let e = self.loss(true)?;
                let (mut f, mut g) = (e.breakdown.total, e.grad);
                while self.state.iteration < block_end {
                    let info = self.lbfgs_iteration(&mut f, &mut g)?;
                    if info.kind == StepKind::Fallback {
                        *fallbacks += 1;
                    }
                    if matches!(info.kind, StepKind::Stalled | StepKind::Converged) {
                        if info.kind == StepKind::Stalled {
                            *fallbacks += 1;
                        }
                        log::info!("L-BFGS stopped early at iteration {}", self.state.iteration);
                        self.state.iteration = block_end;
                    }
                    if self.state.iteration.is_multiple_of(every) || self.state.iteration == block_end {
                        log.push(self.log_row()?);
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs the whole schedule. Numeric failures end the run with status `diverged`.
    pub fn run(mut self) -> Result<TrainOutcome> {
        let start = Instant::now();
        let mut log = Vec::new();
        let mut fallbacks = 0;
        let (mut status, mut divergence) = (RunStatus::Ok, None);
        match self.run_blocks(&mut log, &mut fallbacks) {
            Ok(()) => {}
            Err(e @ Error::Numeric { .. }) => {
                log::warn!("run diverged at iteration {}: {e}", self.state.iteration);
                status = RunStatus::Diverged;
                divergence = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
        let (final_loss, report) = if status == RunStatus::Ok {
            let loss = self.loss(false).map(|e| e.breakdown);
            let report = self.report();
            match (loss, report) {
                (Ok(l), Ok(r)) if r.is_finite() => (l, r),
                _ => {
                    status = RunStatus::Diverged;
                    divergence = Some("non-finite final loss or error".into());
                    (LossBreakdown::nan(), nan_report(self.problem))
                }
            }
        } else {
            (LossBreakdown::nan(), nan_report(self.problem))
        };
        Ok(TrainOutcome {
            state: self.state,
            status,
            divergence,
            final_loss,
            report,
            log,
            snapshots: self.snapshots,
            lbfgs_fallbacks: fallbacks,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

fn nan_report(problem: &PdeProblem) -> ErrorReport {
    let per_output = if problem.output_dim > 1 { vec![f64::NAN; problem.output_dim] } else { Vec::new() };
    ErrorReport { l2: f64::NAN, per_output, inverse: vec![f64::NAN; problem.inverse.len()] }
}
