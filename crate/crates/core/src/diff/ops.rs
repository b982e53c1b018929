use super::field::DifferentiableField;
use super::functional::{Bars, PointFunctional};
use super::jet::Jet2;
use crate::error::{Error, Result};
use crate::pde::ResidualOperator;

/// Value, gradient, and Hessian of every output of `field` at `p`.
pub fn eval_jet2(field: &dyn DifferentiableField, p: &[f64], theta: &[f64]) -> Result<Vec<Jet2>> {
    if p.len() != field.input_dim() {
        return Err(Error::config(format!("point has {} coordinates, field expects {}", p.len(), field.input_dim())));
    }
    if theta.len() != field.param_len() {
        return Err(Error::config(format!(
            "parameter vector has {} entries, field expects {}",
            theta.len(),
            field.param_len()
        )));
    }
    let jets = field.jet2(p, theta)?;
    if let Some(bad) = jets.iter().position(|j| !j.is_finite()) {
        return Err(Error::numeric(format!("non-finite jet for output {bad}"), format!("point {p:?}")));
    }
    Ok(jets)
}

/// A scalar objective over a parameter vector that knows its own gradient.
pub trait ParamObjective {
    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// `dLoss/dθ`, rejecting non-finite losses and gradients.
pub fn param_gradient(loss: &dyn ParamObjective, theta: &[f64]) -> Result<Vec<f64>> {
    let (value, grad) = loss.value_and_gradient(theta)?;
    if !value.is_finite() {
        return Err(Error::numeric("non-finite loss", format!("loss = {value}")));
    }
    if grad.len() != theta.len() {
        return Err(Error::config("gradient length differs from parameter length"));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::numeric("non-finite parameter gradient", format!("component {i}")));
    }
    Ok(grad)
}

/// `scale · Σ_k r_k²` at each point, with adjoints through the residual operator.
pub struct SquaredResidual<'a> {
    pub op: &'a dyn ResidualOperator,
    pub inverse: &'a [f64],
    pub scale: f64,
}

impl PointFunctional for SquaredResidual<'_> {
    fn n_extra(&self) -> usize {
        self.inverse.len()
    }

    fn eval(&self, _index: usize, coords: &[f64], jets: &[Jet2], bars: Option<Bars<'_>>) -> f64 {
        let mut r = [0.0; 4];
        let n = self.op.n_residuals();
        self.op.residual(coords, jets, self.inverse, &mut r[..n]);
        let value = self.scale * r[..n].iter().map(|v| v * v).sum::<f64>();
        if let Some(mut bars) = bars {
            let mut r_bar = [0.0; 4];
            for k in 0..n {
                r_bar[k] = 2.0 * self.scale * r[k];
            }
            self.op.residual_vjp(coords, jets, self.inverse, &r_bar[..n], &mut bars.reborrow());
        }
        value
    }
}

/// `∇_p r²(p)` for the residual of `op` applied to `field`.
pub fn input_gradient_sq_residual(
    op: &dyn ResidualOperator,
    field: &dyn DifferentiableField,
    p: &[f64],
    theta: &[f64],
    inverse: &[f64],
) -> Result<Vec<f64>> {
    if p.len() != field.input_dim() || op.input_dim() != field.input_dim() {
        return Err(Error::config(format!(
            "dimension mismatch: point {}, field {}, operator {}",
            p.len(),
            field.input_dim(),
            op.input_dim()
        )));
    }
    let functional = SquaredResidual { op, inverse, scale: 1.0 };
    let out = field.pointwise(theta, p, &op.hessian_pairs(), &functional, true)?;
    if out.input_grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::numeric("non-finite squared-residual gradient", format!("point {p:?}")));
    }
    Ok(out.input_grads)
}
