use super::residual::ResidualOperator;
use crate::diff::{DifferentiableField, SquaredResidual};
use crate::error::{Error, Result};

/// A residual operator applied to a frozen field: the surface PACMANN climbs
/// and the adaptive samplers rank.
#[derive(Clone, Copy)]
pub struct ResidualLandscape<'a> {
    pub op: &'a dyn ResidualOperator,
    pub field: &'a dyn DifferentiableField,
    pub theta: &'a [f64],
    pub inverse: &'a [f64],
}

impl ResidualLandscape<'_> {
    fn dim(&self) -> usize {
        self.op.input_dim()
    }

    /// Residual components at every point, row-major `n × n_residuals`.
    pub fn residuals(&self, points: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        let m = self.field.output_dim();
        let k = self.op.n_residuals();
        let jets = self.field.jets(self.theta, points, &self.op.hessian_pairs())?;
        let mut out = vec![0.0; points.len() / d * k];
        for (i, (p, r)) in points.chunks_exact(d).zip(out.chunks_exact_mut(k)).enumerate() {
            self.op.residual(p, &jets[i * m..(i + 1) * m], self.inverse, r);
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric("non-finite residual", format!("point {i} at {p:?}")));
            }
        }
        Ok(out)
    }

    /// `Σ_k r_k²` at every point.
    pub fn sq_residuals(&self, points: &[f64]) -> Result<Vec<f64>> {
        let k = self.op.n_residuals();
        Ok(self.residuals(points)?.chunks_exact(k).map(|r| r.iter().map(|v| v * v).sum()).collect())
    }

    /// Euclidean residual magnitude at every point.
    pub fn residual_norms(&self, points: &[f64]) -> Result<Vec<f64>> {
        Ok(self.sq_residuals(points)?.into_iter().map(f64::sqrt).collect())
    }

    /// `∇_p Σ_k r_k²` at every point, row-major `n × d`.
    pub fn sq_residual_grads(&self, points: &[f64]) -> Result<Vec<f64>> {
        let grads = self.sq_residual_grads_unchecked(points)?;
        let d = self.dim();
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            let p = i / d;
            return Err(Error::numeric(
                "non-finite squared-residual gradient",
                format!("point {p} at {:?}", &points[p * d..(p + 1) * d]),
            ));
        }
        Ok(grads)
    }

    /// As [`ResidualLandscape::sq_residual_grads`], leaving non-finite entries in place.
    pub fn sq_residual_grads_unchecked(&self, points: &[f64]) -> Result<Vec<f64>> {
        let functional = SquaredResidual { op: self.op, inverse: self.inverse, scale: 1.0 };
        let out = self.field.pointwise(self.theta, points, &self.op.hessian_pairs(), &functional, true)?;
        Ok(out.input_grads)
    }
}
