use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pacmann::PacmannConfig;
use crate::samplers::BaselineSamplerConfig;

/// Block structure of a training run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSchedule {
    pub blocks: usize,
    pub adam_iters: usize,
    pub lbfgs_iters: usize,
    pub adam_lr: f64,
    /// Adam iterations between resampling events.
    pub period: usize,
}

impl TrainSchedule {
    /// Five blocks of 7000 Adam and 3000 L-BFGS iterations, events every 50.
    pub fn paper() -> Self {
        TrainSchedule { blocks: 5, adam_iters: 7000, lbfgs_iters: 3000, adam_lr: 1e-3, period: 50 }
    }

    /// Two blocks of 2000 Adam and 500 L-BFGS iterations, events every 50.
    pub fn desk() -> Self {
        TrainSchedule { blocks: 2, adam_iters: 2000, lbfgs_iters: 500, adam_lr: 1e-3, period: 50 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks < 1 {
            return Err(Error::config("schedule needs at least one block"));
        }
        if self.period < 1 || self.period > self.adam_iters {
            return Err(Error::config(format!(
                "resampling period {} must lie in 1..={} (the Adam phase length)",
                self.period, self.adam_iters
            )));
        }
        if !(self.adam_lr > 0.0 && self.adam_lr.is_finite()) {
            return Err(Error::config("Adam learning rate must be positive"));
        }
        Ok(())
    }

    pub fn events_per_block(&self) -> usize {
        self.adam_iters / self.period
    }

    pub fn total_iterations(&self) -> usize {
        self.blocks * (self.adam_iters + self.lbfgs_iters)
    }
}

/// Collocation strategy of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    Baseline(BaselineSamplerConfig),
    Pacmann(PacmannConfig),
}

impl SamplerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerChoice::Baseline(b) => b.kind.name(),
            SamplerChoice::Pacmann(_) => "pacmann",
        }
    }

    pub fn period(&self) -> usize {
        match self {
            SamplerChoice::Baseline(b) => b.period,
            SamplerChoice::Pacmann(p) => p.period,
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, SamplerChoice::Baseline(b) if b.kind.is_static())
    }

    pub fn validate(&self, n_r: usize) -> Result<()> {
        match self {
            SamplerChoice::Baseline(b) => b.validate(n_r),
            SamplerChoice::Pacmann(p) => p.validate(),
        }
    }
}
