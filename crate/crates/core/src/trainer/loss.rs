use serde::{Deserialize, Serialize};

use crate::diff::{Bars, DifferentiableField, Jet2, PointFunctional, SquaredResidual};
use crate::error::{Error, Result};
use crate::network::{JetLayout, Mlp, ParameterVector, Sweep};
use crate::pde::PdeProblem;

fn one() -> f64 {
    1.0
}

/// Scalar weights of the loss terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    #[serde(default = "one")]
    pub lambda_r: f64,
    #[serde(default = "one")]
    pub lambda_ic: f64,
    #[serde(default = "one")]
    pub lambda_bc: f64,
    #[serde(default = "one")]
    pub lambda_ref: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { lambda_r: 1.0, lambda_ic: 1.0, lambda_bc: 1.0, lambda_ref: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_r, self.lambda_ic, self.lambda_bc, self.lambda_ref];
        if all.iter().all(|w| w.is_finite() && *w > 0.0) {
            Ok(())
        } else {
            Err(Error::config(format!("loss weights must be positive and finite, got {all:?}")))
        }
    }
}

/// Fixed points with target values for every output, both row-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Supervised {
    pub points: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Supervised {
    pub fn len(&self, dim: usize) -> usize {
        self.points.len() / dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Everything but the collocation points that enters the loss.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossData {
    pub boundary: Supervised,
    pub initial: Option<Supervised>,
    pub reference: Option<Supervised>,
}

/// Weighted loss terms; absent terms are `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub r: f64,
    pub ic: Option<f64>,
    pub bc: f64,
    pub reference: Option<f64>,
}

impl LossBreakdown {
    pub fn nan() -> Self {
        LossBreakdown { total: f64::NAN, r: f64::NAN, ic: None, bc: f64::NAN, reference: None }
    }
}

#[derive(Clone, Debug)]
pub struct LossEval {
    pub breakdown: LossBreakdown,
    /// Gradient over the whole parameter vector, inverse scalars last; empty unless requested.
    pub grad: Vec<f64>,
}

/// `scale · Σ_o (u_o − target_o)²` per point.
struct Mismatch<'a> {
    targets: &'a [f64],
    outputs: usize,
    scale: f64,
}

impl PointFunctional for Mismatch<'_> {
    fn eval(&self, index: usize, _coords: &[f64], jets: &[Jet2], bars: Option<Bars<'_>>) -> f64 {
        let t = &self.targets[index * self.outputs..(index + 1) * self.outputs];
        let mut total = 0.0;
        let mut bars = bars;
        for o in 0..self.outputs {
            let e = jets[o].value - t[o];
            total += e * e;
            if let Some(b) = bars.as_mut() {
                b.jets[o].value = 2.0 * self.scale * e;
            }
        }
        self.scale * total
    }
}

fn sweep(with_grad: bool) -> Sweep {
    if with_grad {
        Sweep::PARAMS
    } else {
        Sweep::NONE
    }
}

/// `λ · mean_points Σ_o (û_o − target_o)²`. With `with_grad` its gradient
/// over the network parameters is added to `grad`.
pub fn supervised_loss(
    mlp: &Mlp,
    theta: &[f64],
    data: &Supervised,
    weight: f64,
    grad: &mut [f64],
    with_grad: bool,
) -> Result<f64> {
    let d = mlp.config().input_dim;
    let m = mlp.config().output_dim;
    let n = data.len(d);
    if n == 0 {
        return Ok(0.0);
    }
    if data.targets.len() != n * m {
        return Err(Error::config(format!("{n} points but {} target values", data.targets.len())));
    }
    let f = Mismatch { targets: &data.targets, outputs: m, scale: weight / n as f64 };
    let out = mlp.jet_pass(theta, &data.points, &JetLayout::value_only(d), sweep(with_grad), &f)?;
    for (g, c) in grad.iter_mut().zip(&out.param_grad) {
        *g += c;
    }
    Ok(out.total)
}

/// `λ_r·mean(r²) + λ_ic·mean((û−h)²) + λ_bc·mean((û−g)²) + λ_ref·mean((û−u_ref)²)`.
///
/// Vector outputs and vector residuals are summed over components before the
/// mean over points. The residual term reads the inverse scalars from the tail
/// of `theta`, and their gradient is returned there.
pub fn compute_loss(
    problem: &PdeProblem,
    mlp: &Mlp,
    theta: &ParameterVector,
    collocation: &[f64],
    data: &LossData,
    weights: &LossWeights,
    with_grad: bool,
) -> Result<LossEval> {
    let net = theta.network();
    let d = problem.input_dim();
    let n_r = collocation.len() / d;
    if n_r == 0 {
        return Err(Error::config("empty collocation set"));
    }
    let mut grad = if with_grad { vec![0.0; theta.len()] } else { Vec::new() };
    let op = problem.residual.as_ref();
    let functional = SquaredResidual { op, inverse: theta.inverse(), scale: weights.lambda_r / n_r as f64 };
    let layout = JetLayout::with_pairs(d, &op.hessian_pairs());
    let out = mlp.jet_pass(net, collocation, &layout, sweep(with_grad), &functional)?;
    if with_grad {
        grad[..net.len()].copy_from_slice(&out.param_grad);
        grad[net.len()..].copy_from_slice(&out.extra_grad);
    }
    let r = out.total;
    let bc = supervised_loss(mlp, net, &data.boundary, weights.lambda_bc, &mut grad, with_grad)?;
    let ic = match &data.initial {
        Some(s) => Some(supervised_loss(mlp, net, s, weights.lambda_ic, &mut grad, with_grad)?),
        None => None,
    };
    let reference = match &data.reference {
        Some(s) => Some(supervised_loss(mlp, net, s, weights.lambda_ref, &mut grad, with_grad)?),
        None => None,
    };
    let total = r + bc + ic.unwrap_or(0.0) + reference.unwrap_or(0.0);
    if !total.is_finite() {
        return Err(Error::numeric("non-finite loss", format!("r={r}, bc={bc}, ic={ic:?}, ref={reference:?}")));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::numeric("non-finite loss gradient", format!("component {i}")));
    }
    Ok(LossEval { breakdown: LossBreakdown { total, r, ic, bc, reference }, grad })
}

/// The loss terms of any field, point by point and without gradients.
///
/// Same weighting and means as [`compute_loss`]; `inverse` supplies the
/// problem scalars the residual reads.
pub fn field_loss(
    problem: &PdeProblem,
    field: &dyn DifferentiableField,
    theta: &[f64],
    inverse: &[f64],
    collocation: &[f64],
    data: &LossData,
    weights: &LossWeights,
) -> Result<LossBreakdown> {
    let d = problem.input_dim();
    let n_r = collocation.len() / d;
    if n_r == 0 {
        return Err(Error::config("empty collocation set"));
    }
    let op = problem.residual.as_ref();
    let mut res = vec![0.0; op.n_residuals()];
    let mut r = 0.0;
    for p in collocation.chunks_exact(d) {
        op.residual(p, &field.jet2(p, theta)?, inverse, &mut res);
        r += res.iter().map(|v| v * v).sum::<f64>();
    }
    let r = weights.lambda_r * r / n_r as f64;
    let mismatch = |s: &Supervised, w: f64| -> Result<f64> {
        let n = s.len(d);
        if n == 0 {
            return Ok(0.0);
        }
        let m = problem.output_dim;
        let mut sum = 0.0;
        for (p, t) in s.points.chunks_exact(d).zip(s.targets.chunks_exact(m)) {
            sum += field.eval(p, theta)?.iter().zip(t).map(|(u, t)| (u - t) * (u - t)).sum::<f64>();
        }
        Ok(w * sum / n as f64)
    };
    let bc = mismatch(&data.boundary, weights.lambda_bc)?;
    let ic = data.initial.as_ref().map(|s| mismatch(s, weights.lambda_ic)).transpose()?;
    let reference = data.reference.as_ref().map(|s| mismatch(s, weights.lambda_ref)).transpose()?;
    let total = r + bc + ic.unwrap_or(0.0) + reference.unwrap_or(0.0);
    Ok(LossBreakdown { total, r, ic, bc, reference })
}
