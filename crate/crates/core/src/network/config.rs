use serde::{Deserialize, Serialize};

use crate::diff::MAX_DIM;
use crate::error::{Error, Result};

/// Shape of a fully connected tanh network. The final layer is affine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden: Vec<usize>,
}

/// Offsets of one affine layer inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in` weight block.
    pub w_offset: usize,
    pub b_offset: usize,
}

impl MlpConfig {
    pub fn new(input_dim: usize, output_dim: usize, hidden: Vec<usize>) -> Self {
        MlpConfig { input_dim, output_dim, hidden }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.input_dim) {
            return Err(Error::config(format!("input_dim must be in 1..={MAX_DIM}, got {}", self.input_dim)));
        }
        if !(1..=3).contains(&self.output_dim) {
            return Err(Error::config(format!("output_dim must be in 1..=3, got {}", self.output_dim)));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden layer widths must be at least 1"));
        }
        Ok(())
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_dim);
        widths.extend_from_slice(&self.hidden);
        widths.push(self.output_dim);
        let mut offset = 0;
        widths
            .windows(2)
            .map(|w| {
                let shape = LayerShape { n_in: w[0], n_out: w[1], w_offset: offset, b_offset: offset + w[0] * w[1] };
                offset += w[0] * w[1] + w[1];
                shape
            })
            .collect()
    }

    /// Σ_l (w_{l-1}·w_l + w_l).
    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.n_in * l.n_out + l.n_out).sum()
    }
}
