//! Error metrics, run records, and multi-seed statistics.

mod records;

pub use records::{
    aggregate, filter_divergent, read_results, write_results, AggregateStats, FilterThresholds, ResultRow, ResultTable,
    RunRecord, RunStatus, RESULTS_HEADER,
};

use crate::error::{Error, Result};
use crate::network::{Mlp, ParameterVector};
use crate::pde::reference::reference_values;
use crate::pde::PdeProblem;
use crate::samplers::{hammersley, uniform_grid};

/// Points in every evaluation set.
pub const EVAL_POINTS: usize = 10_000;

/// `‖u_true − u_pred‖₂ / ‖u_true‖₂`.
pub fn l2_relative_error(u_true: &[f64], u_pred: &[f64]) -> Result<f64> {
    if u_true.len() != u_pred.len() {
        return Err(Error::config(format!("reference has {} values, prediction {}", u_true.len(), u_pred.len())));
    }
    let norm = u_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("relative error against a zero reference".into()));
    }
    let diff = u_true.iter().zip(u_pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(diff / norm)
}

/// The fixed evaluation set of a problem, row-major.
///
/// Up to three dimensions this is the balanced tensor grid of at most
/// 10,000 nodes; higher dimensions use 10,000 Hammersley points, since no
/// integer tensor grid has exactly that many nodes.
pub fn eval_grid(problem: &PdeProblem) -> Vec<f64> {
    let set = if problem.input_dim() <= 3 {
        uniform_grid(EVAL_POINTS, &problem.domain)
    } else {
        hammersley(EVAL_POINTS, &problem.domain)
    };
    set.points().to_vec()
}

/// Errors of one trained model.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    /// Relative error over all outputs stacked.
    pub l2: f64,
    /// Per-output relative errors, only for problems with several outputs.
    pub per_output: Vec<f64>,
    /// `|λ̂ − λ*| / |λ*|` per learned problem scalar.
    pub inverse: Vec<f64>,
}

impl ErrorReport {
    pub fn is_finite(&self) -> bool {
        self.l2.is_finite() && self.per_output.iter().chain(&self.inverse).all(|v| v.is_finite())
    }
}

/// Evaluation set and reference values, computed once per problem.
#[derive(Clone, Debug)]
pub struct Evaluator {
    points: Vec<f64>,
    reference: Vec<f64>,
    output_dim: usize,
    truths: Vec<f64>,
}

impl Evaluator {
    pub fn new(problem: &PdeProblem) -> Result<Self> {
        let points = eval_grid(problem);
        let reference = reference_values(problem.reference.as_ref(), &points)?;
        Ok(Evaluator {
            points,
            reference,
            output_dim: problem.output_dim,
            truths: problem.inverse.iter().map(|s| s.truth).collect(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn report(&self, mlp: &Mlp, theta: &ParameterVector) -> Result<ErrorReport> {
        let pred = mlp.forward_batch(theta.network(), &self.points)?;
        let l2 = l2_relative_error(&self.reference, &pred)?;
        let m = self.output_dim;
        let per_output = if m > 1 {
            (0..m)
                .map(|o| {
                    let column = |v: &[f64]| v.iter().skip(o).step_by(m).copied().collect::<Vec<_>>();
                    l2_relative_error(&column(&self.reference), &column(&pred))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let inverse =
            theta.inverse().iter().zip(&self.truths).map(|(est, truth)| (est - truth).abs() / truth.abs()).collect();
        Ok(ErrorReport { l2, per_output, inverse })
    }
}
