use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Update rule applied to collocation coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointOptimizer {
    GradientAscent,
    NonlinearGa,
    Rmsprop,
    Momentum,
    Adam,
    GoldenSection,
}

impl PointOptimizer {
    pub const ALL: [PointOptimizer; 6] = [
        PointOptimizer::GradientAscent,
        PointOptimizer::NonlinearGa,
        PointOptimizer::Rmsprop,
        PointOptimizer::Momentum,
        PointOptimizer::Adam,
        PointOptimizer::GoldenSection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PointOptimizer::GradientAscent => "gradient_ascent",
            PointOptimizer::NonlinearGa => "nonlinear_ga",
            PointOptimizer::Rmsprop => "rmsprop",
            PointOptimizer::Momentum => "momentum",
            PointOptimizer::Adam => "adam",
            PointOptimizer::GoldenSection => "golden_section",
        }
    }
}

impl fmt::Display for PointOptimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings of one PACMANN sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacmannConfig {
    pub optimizer: PointOptimizer,
    pub stepsize: f64,
    pub steps: usize,
    #[serde(default = "defaults::period")]
    pub period: usize,
    #[serde(default = "defaults::rmsprop_beta")]
    pub rmsprop_beta: f64,
    #[serde(default = "defaults::momentum_beta")]
    pub momentum_beta: f64,
    #[serde(default = "defaults::adam_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "defaults::adam_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "defaults::eps")]
    pub eps: f64,
}

mod defaults {
    pub fn period() -> usize {
        50
    }
    pub fn rmsprop_beta() -> f64 {
        0.999
    }
    pub fn momentum_beta() -> f64 {
        0.9
    }
    pub fn adam_beta1() -> f64 {
        0.9
    }
    pub fn adam_beta2() -> f64 {
        0.999
    }
    pub fn eps() -> f64 {
        1e-8
    }
}

impl PacmannConfig {
    pub fn new(optimizer: PointOptimizer, stepsize: f64, steps: usize) -> Self {
        PacmannConfig {
            optimizer,
            stepsize,
            steps,
            period: defaults::period(),
            rmsprop_beta: defaults::rmsprop_beta(),
            momentum_beta: defaults::momentum_beta(),
            adam_beta1: defaults::adam_beta1(),
            adam_beta2: defaults::adam_beta2(),
            eps: defaults::eps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stepsize > 0.0) || !self.stepsize.is_finite() {
            return Err(Error::config("PACMANN stepsize must be positive and finite"));
        }
        if self.period < 1 {
            return Err(Error::config("PACMANN period must be at least 1"));
        }
        for (name, b) in [
            ("rmsprop_beta", self.rmsprop_beta),
            ("momentum_beta", self.momentum_beta),
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.eps > 0.0) {
            return Err(Error::config("eps must be positive"));
        }
        Ok(())
    }
}
