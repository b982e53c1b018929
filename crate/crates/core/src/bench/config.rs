use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::FilterThresholds;
use crate::pacmann::{PacmannConfig, PointOptimizer};
use crate::pde::{PdeProblem, PointCounts, ProblemKind, ProblemOptions, ProblemParams};
use crate::samplers::{BaselineKind, BaselineSamplerConfig};
use crate::trainer::{LbfgsConfig, LossWeights, SamplerChoice, TrainConfig, TrainSchedule};

/// Training budget a config starts from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Two blocks of 2000 Adam and 500 L-BFGS iterations.
    #[default]
    Desk,
    /// Five blocks of 7000 Adam and 3000 L-BFGS iterations.
    Paper,
}

impl Preset {
    pub fn schedule(self) -> TrainSchedule {
        match self {
            Preset::Desk => TrainSchedule::desk(),
            Preset::Paper => TrainSchedule::paper(),
        }
    }
}

/// Every collocation strategy by its config name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    UniformGrid,
    Hammersley,
    RandomResample,
    Rar,
    Rad,
    RarD,
    Pacmann,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self.baseline() {
            Some(b) => b.name(),
            None => "pacmann",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        Some(match self {
            SamplerKind::UniformGrid => BaselineKind::UniformGrid,
            SamplerKind::Hammersley => BaselineKind::Hammersley,
            SamplerKind::RandomResample => BaselineKind::RandomResample,
            SamplerKind::Rar => BaselineKind::Rar,
            SamplerKind::Rad => BaselineKind::Rad,
            SamplerKind::RarD => BaselineKind::RarD,
            SamplerKind::Pacmann => return None,
        })
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// PACMANN settings recommended for each problem: `(stepsize, steps)` with the Adam rule.
pub fn pacmann_defaults(problem: ProblemKind) -> (f64, usize) {
    match problem {
        ProblemKind::Burgers => (1e-5, 15),
        ProblemKind::AllenCahn => (1e-5, 5),
        ProblemKind::Poisson | ProblemKind::NavierStokes => (1e-2, 5),
    }
}

/// The sampler block: a kind plus the fields that kind understands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerBlock {
    pub kind: SamplerKind,
    /// Adam iterations between resampling events.
    #[serde(default = "default_period")]
    pub period: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<PointOptimizer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepsize: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmsprop_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam_beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam_beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rar_add: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rad_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rad_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
}

fn default_period() -> usize {
    50
}

impl SamplerBlock {
    pub fn new(kind: SamplerKind) -> Self {
        SamplerBlock {
            kind,
            period: default_period(),
            optimizer: None,
            stepsize: None,
            steps: None,
            rmsprop_beta: None,
            momentum_beta: None,
            adam_beta1: None,
            adam_beta2: None,
            eps: None,
            rar_add: None,
            rad_k: None,
            rad_c: None,
            pool_size: None,
        }
    }

    fn pacmann_fields(&self) -> [(&'static str, bool); 8] {
        [
            ("optimizer", self.optimizer.is_some()),
            ("stepsize", self.stepsize.is_some()),
            ("steps", self.steps.is_some()),
            ("rmsprop_beta", self.rmsprop_beta.is_some()),
            ("momentum_beta", self.momentum_beta.is_some()),
            ("adam_beta1", self.adam_beta1.is_some()),
            ("adam_beta2", self.adam_beta2.is_some()),
            ("eps", self.eps.is_some()),
        ]
    }

    fn baseline_fields(&self) -> [(&'static str, bool); 4] {
        [
            ("rar_add", self.rar_add.is_some()),
            ("rad_k", self.rad_k.is_some()),
            ("rad_c", self.rad_c.is_some()),
            ("pool_size", self.pool_size.is_some()),
        ]
    }

    /// The sampler this block describes, with per-problem defaults for absent fields.
    pub fn resolve(&self, problem: ProblemKind) -> Result<SamplerChoice> {
        let foreign = |fields: &[(&'static str, bool)]| fields.iter().find(|(_, set)| *set).map(|(n, _)| *n);
        match self.kind.baseline() {
            Some(kind) => {
                if let Some(name) = foreign(&self.pacmann_fields()) {
                    return Err(Error::config(format!("sampler field `{name}` only applies to kind `pacmann`")));
                }
                let mut b = BaselineSamplerConfig::new(kind);
                b.period = self.period;
                b.rar_add = self.rar_add.unwrap_or(b.rar_add);
                b.rad_k = self.rad_k.unwrap_or(b.rad_k);
                b.rad_c = self.rad_c.unwrap_or(b.rad_c);
                b.pool_size = self.pool_size;
                Ok(SamplerChoice::Baseline(b))
            }
            None => {
                if let Some(name) = foreign(&self.baseline_fields()) {
                    return Err(Error::config(format!("sampler field `{name}` does not apply to kind `pacmann`")));
                }
                let (s, t) = pacmann_defaults(problem);
                let mut p = PacmannConfig::new(
                    self.optimizer.unwrap_or(PointOptimizer::Adam),
                    self.stepsize.unwrap_or(s),
                    self.steps.unwrap_or(t),
                );
                p.period = self.period;
                p.rmsprop_beta = self.rmsprop_beta.unwrap_or(p.rmsprop_beta);
                p.momentum_beta = self.momentum_beta.unwrap_or(p.momentum_beta);
                p.adam_beta1 = self.adam_beta1.unwrap_or(p.adam_beta1);
                p.adam_beta2 = self.adam_beta2.unwrap_or(p.adam_beta2);
                p.eps = self.eps.unwrap_or(p.eps);
                Ok(SamplerChoice::Pacmann(p))
            }
        }
    }

    /// The block with every field the kind understands written out.
    fn resolved(&self, problem: ProblemKind, n_r: usize) -> Result<Self> {
        let mut out = SamplerBlock::new(self.kind);
        out.period = self.period;
        match self.resolve(problem)? {
            SamplerChoice::Baseline(b) => {
                out.rar_add = Some(b.rar_add);
                out.rad_k = Some(b.rad_k);
                out.rad_c = Some(b.rad_c);
                out.pool_size = Some(b.pool_size(n_r));
            }
            SamplerChoice::Pacmann(p) => {
                out.optimizer = Some(p.optimizer);
                out.stepsize = Some(p.stepsize);
                out.steps = Some(p.steps);
                out.rmsprop_beta = Some(p.rmsprop_beta);
                out.momentum_beta = Some(p.momentum_beta);
                out.adam_beta1 = Some(p.adam_beta1);
                out.adam_beta2 = Some(p.adam_beta2);
                out.eps = Some(p.eps);
            }
        }
        Ok(out)
    }
}

/// Point-count overrides; absent fields keep the problem's counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bc: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ref: Option<usize>,
}

/// Schedule overrides on top of the preset. The resampling period lives in the sampler block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lbfgs_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam_lr: Option<f64>,
}

/// Logging, divergence filtering, and retries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalOptions {
    /// Iterations between training-log rows.
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    /// Replacement runs allowed per seed after divergence or filtering.
    #[serde(default = "default_retries")]
    pub retries: usize,
    #[serde(default)]
    pub filter: FilterThresholds,
}

fn default_log_every() -> usize {
    100
}

fn default_retries() -> usize {
    2
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { log_every: default_log_every(), retries: default_retries(), filter: FilterThresholds::default() }
    }
}

/// External data files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataOptions {
    /// Observation CSV (`t,x,y,u,v,p`) replacing generated Taylor–Green data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<PathBuf>,
    /// Directory for cached reference tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

/// One experiment: a problem, a sampler, a budget, and a list of seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub params: ProblemParams,
    /// Hidden-layer widths; absent means the problem's default network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<Vec<usize>>,
    #[serde(default)]
    pub counts: CountsBlock,
    #[serde(default)]
    pub schedule: ScheduleBlock,
    pub sampler: SamplerBlock,
    #[serde(default)]
    pub weights: LossWeights,
    #[serde(default)]
    pub lbfgs: LbfgsConfig,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub eval: EvalOptions,
    #[serde(default)]
    pub data: DataOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Snapshot the collocation set before every k-th event; 0 disables.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config(format!("invalid experiment config: {e}")))
    }
}

impl ExperimentConfig {
    /// A config with the recommended sampler settings for `problem`.
    pub fn preset(problem: ProblemKind, preset: Preset, sampler: SamplerKind, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            problem,
            preset,
            params: ProblemParams::default(),
            net: None,
            counts: CountsBlock::default(),
            schedule: ScheduleBlock::default(),
            sampler: SamplerBlock::new(sampler),
            weights: LossWeights::default(),
            lbfgs: LbfgsConfig::default(),
            seeds,
            eval: EvalOptions::default(),
            data: DataOptions::default(),
            output_dir: default_output_dir(),
            snapshot_every: 0,
        }
    }

    /// Reads a config file. Relative data and output paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            text.parse().map_err(|e: Error| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.data.observations.iter_mut().for_each(rebase);
        cfg.data.cache_dir.iter_mut().for_each(rebase);
        rebase(&mut cfg.output_dir);
        Ok(cfg)
    }

    pub fn problem_options(&self) -> ProblemOptions {
        ProblemOptions { cache_dir: self.data.cache_dir.clone(), observations: self.data.observations.clone() }
    }

    pub fn build_problem(&self) -> Result<PdeProblem> {
        PdeProblem::build(self.problem, self.params, &self.problem_options())
    }

    pub fn train_schedule(&self) -> TrainSchedule {
        let base = self.preset.schedule();
        let s = &self.schedule;
        TrainSchedule {
            blocks: s.blocks.unwrap_or(base.blocks),
            adam_iters: s.adam_iters.unwrap_or(base.adam_iters),
            lbfgs_iters: s.lbfgs_iters.unwrap_or(base.lbfgs_iters),
            adam_lr: s.adam_lr.unwrap_or(base.adam_lr),
            period: self.sampler.period,
        }
    }

    /// The training configuration shared by every seed, validated against the problem.
    pub fn train_config(&self, problem: &PdeProblem) -> Result<TrainConfig> {
        let sampler = self.sampler.resolve(self.problem)?;
        let mut cfg = TrainConfig::for_problem(problem, self.train_schedule(), sampler);
        if let Some(net) = &self.net {
            cfg.hidden = net.clone();
        }
        let c = &self.counts;
        let base = problem.counts;
        cfg.counts = PointCounts {
            n_r: c.n_r.unwrap_or(base.n_r),
            n_bc: c.n_bc.unwrap_or(base.n_bc),
            n_ic: c.n_ic.unwrap_or(base.n_ic),
            n_ref: c.n_ref.unwrap_or(base.n_ref),
        };
        cfg.weights = self.weights;
        cfg.lbfgs = self.lbfgs;
        cfg.log_every = self.eval.log_every;
        cfg.snapshot_every = self.snapshot_every;
        cfg.validate(problem)?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without training.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("config lists no seeds"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("seeds must be distinct"));
        }
        let f = &self.eval.filter;
        if !(f.loss_factor > 1.0 && f.l2_factor > 1.0) {
            return Err(Error::config("filter factors must exceed 1"));
        }
        let problem = self.build_problem()?;
        self.train_config(&problem).map(|_| ())
    }

    /// The same experiment with every default written out.
    pub fn resolved(&self) -> Result<Self> {
        let problem = self.build_problem()?;
        let train = self.train_config(&problem)?;
        let s = self.train_schedule();
        let mut out = self.clone();
        out.net = Some(train.hidden.clone());
        out.counts = CountsBlock {
            n_r: Some(train.counts.n_r),
            n_bc: Some(train.counts.n_bc),
            n_ic: Some(train.counts.n_ic),
            n_ref: Some(train.counts.n_ref),
        };
        out.schedule = ScheduleBlock {
            blocks: Some(s.blocks),
            adam_iters: Some(s.adam_iters),
            lbfgs_iters: Some(s.lbfgs_iters),
            adam_lr: Some(s.adam_lr),
        };
        out.sampler = self.sampler.resolved(self.problem, train.counts.n_r)?;
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
