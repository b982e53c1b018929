//! Collocation sets and the baseline sampling strategies.

mod adaptive;
mod collocation;
mod lattice;
mod snapshot;

pub use adaptive::{
    rad_resample, rad_weights, rar_step, rard_step, resample_random, top_residuals, weighted_without_replacement,
};
pub use collocation::{CollocationSet, Origin};
pub use lattice::{grid_counts, hammersley, hammersley_unit, radical_inverse, uniform_grid};
pub use snapshot::{read_snapshots, snapshot_header, write_snapshots, Snapshot};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Baseline strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    UniformGrid,
    Hammersley,
    RandomResample,
    Rar,
    Rad,
    RarD,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::UniformGrid => "uniform_grid",
            BaselineKind::Hammersley => "hammersley",
            BaselineKind::RandomResample => "random_resample",
            BaselineKind::Rar => "rar",
            BaselineKind::Rad => "rad",
            BaselineKind::RarD => "rar_d",
        }
    }

    /// Static layouts are built once and never touched during training.
    pub fn is_static(self) -> bool {
        matches!(self, BaselineKind::UniformGrid | BaselineKind::Hammersley)
    }
}

/// Settings of a baseline sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSamplerConfig {
    pub kind: BaselineKind,
    /// Iterations between resampling events.
    #[serde(default = "default_period")]
    pub period: usize,
    /// Points added per RAR or RAR-D event.
    #[serde(default = "default_rar_add")]
    pub rar_add: usize,
    #[serde(default = "default_one")]
    pub rad_k: f64,
    #[serde(default = "default_one")]
    pub rad_c: f64,
    /// Candidate pool size per event; `None` means ten times the collocation count.
    #[serde(default)]
    pub pool_size: Option<usize>,
}

fn default_period() -> usize {
    50
}

fn default_rar_add() -> usize {
    1
}

fn default_one() -> f64 {
    1.0
}

impl BaselineSamplerConfig {
    pub fn new(kind: BaselineKind) -> Self {
        BaselineSamplerConfig {
            kind,
            period: default_period(),
            rar_add: default_rar_add(),
            rad_k: 1.0,
            rad_c: 1.0,
            pool_size: None,
        }
    }

    pub fn pool_size(&self, n_r: usize) -> usize {
        self.pool_size.unwrap_or(10 * n_r)
    }

    pub fn validate(&self, n_r: usize) -> Result<()> {
        if self.period < 1 {
            return Err(Error::config("sampler period must be at least 1"));
        }
        if matches!(self.kind, BaselineKind::Rar | BaselineKind::RarD) && self.rar_add < 1 {
            return Err(Error::config("rar_add must be at least 1"));
        }
        if !(self.rad_k >= 0.0 && self.rad_c >= 0.0) {
            return Err(Error::config("rad_k and rad_c must be non-negative"));
        }
        if self.pool_size(n_r) < 10 * n_r {
            return Err(Error::config(format!("pool_size must be at least 10·N_r = {}", 10 * n_r)));
        }
        Ok(())
    }
}
