//! Fully connected tanh network and its batched jet passes.

mod activation;
mod batch;
mod config;
mod gemm;
mod mlp;
mod params;

pub use batch::{JetLayout, Sweep};
pub use config::{LayerShape, MlpConfig};
pub use mlp::{Mlp, PointwiseObjective};
pub use params::ParameterVector;
