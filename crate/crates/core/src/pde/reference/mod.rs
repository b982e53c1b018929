//! Reference solutions used for error measurement.

mod allen_cahn;
mod burgers;
mod table;

pub use allen_cahn::{AllenCahnReference, AllenCahnSolver};
pub use burgers::{gauss_hermite, ColeHopf};
pub use table::SliceTable;

use rayon::prelude::*;

use crate::error::Result;

/// The true solution of a problem, pointwise.
pub trait ReferenceSolution: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Reference values at every point, row-major `n × output_dim`.
pub fn reference_values(reference: &dyn ReferenceSolution, points: &[f64]) -> Result<Vec<f64>> {
    let d = reference.input_dim();
    let m = reference.output_dim();
    let mut out = vec![0.0; points.len() / d * m];
    out.par_chunks_mut(m).zip(points.par_chunks_exact(d)).try_for_each(|(o, p)| reference.eval_into(p, o))?;
    Ok(out)
}

/// A closed-form reference.
pub struct ExactReference<F> {
    dim: usize,
    outputs: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Send + Sync> ExactReference<F> {
    pub fn new(dim: usize, outputs: usize, f: F) -> Self {
        ExactReference { dim, outputs, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Send + Sync> ReferenceSolution for ExactReference<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.outputs
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(p, out);
        Ok(())
    }
}
