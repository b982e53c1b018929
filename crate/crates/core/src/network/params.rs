use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::MlpConfig;
use crate::error::{Error, Result};

/// Network weights and biases followed by an optional tail of learned problem scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
    n_inverse: usize,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>, n_inverse: usize) -> Result<Self> {
        if n_inverse > values.len() {
            return Err(Error::config("inverse tail longer than parameter vector"));
        }
        Ok(ParameterVector { values, n_inverse })
    }

    /// Glorot-uniform weights, zero biases, no inverse tail.
    pub fn glorot(cfg: &MlpConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0.0; cfg.param_count()];
        for layer in cfg.layers() {
            let a = (6.0 / (layer.n_in + layer.n_out) as f64).sqrt();
            for w in &mut values[layer.w_offset..layer.b_offset] {
                *w = rng.random_range(-a..a);
            }
        }
        ParameterVector { values, n_inverse: 0 }
    }

    pub fn with_inverse(mut self, initial: &[f64]) -> Self {
        self.values.extend_from_slice(initial);
        self.n_inverse += initial.len();
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_inverse(&self) -> usize {
        self.n_inverse
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn network(&self) -> &[f64] {
        &self.values[..self.values.len() - self.n_inverse]
    }

    pub fn inverse(&self) -> &[f64] {
        &self.values[self.values.len() - self.n_inverse..]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Writes the `mlp ...` header line followed by the raw little-endian values.
    pub fn write_checkpoint(&self, cfg: &MlpConfig, path: &Path) -> Result<()> {
        let mut header = format!("mlp {} {}", cfg.input_dim, cfg.output_dim);
        for w in &cfg.hidden {
            header.push_str(&format!(" {w}"));
        }
        header.push_str(&format!(" {}\n", self.n_inverse));
        let mut bytes = header.into_bytes();
        bytes.reserve(self.values.len() * 8);
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn read_checkpoint(path: &Path) -> Result<(MlpConfig, ParameterVector)> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut header = String::new();
        reader.read_line(&mut header).map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 4 || fields[0] != "mlp" {
            return Err(Error::parse(path, "missing `mlp` checkpoint header"));
        }
        let nums = fields[1..]
            .iter()
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, format!("bad header field: {e}")))?;
        let n_inverse = *nums.last().unwrap();
        let cfg = MlpConfig::new(nums[0], nums[1], nums[2..nums.len() - 1].to_vec());
        cfg.validate()?;
        let mut raw = Vec::new();
        reader.read_to_end(&mut raw).map_err(|e| Error::io(path, e))?;
        let expected = cfg.param_count() + n_inverse;
        if raw.len() != expected * 8 {
            return Err(Error::parse(path, format!("expected {} values, found {} bytes", expected, raw.len())));
        }
        let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok((cfg, ParameterVector { values, n_inverse }))
    }
}
