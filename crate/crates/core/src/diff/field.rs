use std::fmt;
use std::sync::Arc;

use super::functional::{Bars, PassOutput, PointFunctional};
use super::jet::{Jet2, MAX_DIM};
use super::taylor::Taylor3;
use crate::error::{Error, Result};

/// A smooth map from points (and parameters) to output values with exact input jets.
pub trait DifferentiableField: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    /// Number of parameters `theta` must carry (zero for closed-form fields).
    fn param_len(&self) -> usize;

    fn eval(&self, p: &[f64], theta: &[f64]) -> Result<Vec<f64>>;

    /// Value, gradient, and Hessian of every output at `p`.
    fn jet2(&self, p: &[f64], theta: &[f64]) -> Result<Vec<Jet2>>;

    /// Vector–Jacobian product of [`DifferentiableField::jet2`] w.r.t. the point.
    fn jet2_input_vjp(&self, p: &[f64], theta: &[f64], bars: &[Jet2]) -> Result<Vec<f64>>;

    /// Jets of every output at every point, row-major `n × output_dim`. `pairs`
    /// lists the Hessian entries needed; implementations may leave others zero.
    fn jets(&self, theta: &[f64], points: &[f64], pairs: &[(usize, usize)]) -> Result<Vec<Jet2>> {
        let _ = pairs;
        let mut out = Vec::with_capacity(points.len() / self.input_dim() * self.output_dim());
        for p in points.chunks_exact(self.input_dim()) {
            out.extend(self.jet2(p, theta)?);
        }
        Ok(out)
    }

    /// Runs `functional` at every point. `pairs` lists the Hessian entries the
    /// functional reads; implementations may leave other entries zero.
    ///
    /// The default goes point by point through `jet2` and `jet2_input_vjp` and
    /// does not produce parameter gradients.
    fn pointwise(
        &self,
        theta: &[f64],
        points: &[f64],
        pairs: &[(usize, usize)],
        functional: &dyn PointFunctional,
        input_grads: bool,
    ) -> Result<PassOutput> {
        let _ = pairs;
        let d = self.input_dim();
        let n_extra = functional.n_extra();
        let mut out = PassOutput {
            extra_grad: vec![0.0; n_extra],
            input_grads: if input_grads { vec![0.0; points.len()] } else { Vec::new() },
            ..PassOutput::default()
        };
        for (idx, p) in points.chunks_exact(d).enumerate() {
            let jets = self.jet2(p, theta)?;
            let v = if input_grads {
                let mut bars = vec![Jet2::zero(d); jets.len()];
                let mut extra = vec![0.0; n_extra];
                let mut coords = vec![0.0; d];
                let v = functional.eval(
                    idx,
                    p,
                    &jets,
                    Some(Bars { jets: &mut bars, extra: &mut extra, coords: &mut coords }),
                );
                let through_field = self.jet2_input_vjp(p, theta, &bars)?;
                for k in 0..d {
                    out.input_grads[idx * d + k] = coords[k] + through_field[k];
                }
                for (g, e) in out.extra_grad.iter_mut().zip(&extra) {
                    *g += e;
                }
                v
            } else {
                functional.eval(idx, p, &jets, None)
            };
            if !v.is_finite() {
                return Err(Error::numeric("non-finite pointwise contribution", format!("point {idx} at {p:?}")));
            }
            out.total += v;
        }
        Ok(out)
    }
}

type TaylorMap = dyn Fn(&[Taylor3]) -> Vec<Taylor3> + Send + Sync;

/// A closed-form field written against [`Taylor3`], ignoring `theta`.
#[derive(Clone)]
pub struct AnalyticField {
    dim: usize,
    outputs: usize,
    map: Arc<TaylorMap>,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField").field("dim", &self.dim).field("outputs", &self.outputs).finish()
    }
}

impl AnalyticField {
    pub fn new(dim: usize, outputs: usize, map: impl Fn(&[Taylor3]) -> Vec<Taylor3> + Send + Sync + 'static) -> Self {
        assert!(dim <= MAX_DIM);
        AnalyticField { dim, outputs, map: Arc::new(map) }
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::config(format!("point has {} coordinates, field expects {}", p.len(), self.dim)));
        }
        Ok(())
    }

    pub fn taylor(&self, p: &[f64]) -> Result<Vec<Taylor3>> {
        self.check(p)?;
        let out = (self.map)(&Taylor3::variables(p));
        if out.len() != self.outputs {
            return Err(Error::config("analytic field returned wrong output count"));
        }
        Ok(out)
    }
}

impl DifferentiableField for AnalyticField {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.outputs
    }

    fn param_len(&self) -> usize {
        0
    }

    fn eval(&self, p: &[f64], _theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.taylor(p)?.iter().map(Taylor3::value).collect())
    }

    fn jet2(&self, p: &[f64], _theta: &[f64]) -> Result<Vec<Jet2>> {
        let d = self.dim;
        Ok(self
            .taylor(p)?
            .iter()
            .map(|t| {
                let mut jet = Jet2::constant(d, t.v);
                jet.grad[..d].copy_from_slice(&t.g[..d]);
                for i in 0..d {
                    jet.hess[i][..d].copy_from_slice(&t.h[i][..d]);
                }
                jet
            })
            .collect())
    }

    fn jet2_input_vjp(&self, p: &[f64], _theta: &[f64], bars: &[Jet2]) -> Result<Vec<f64>> {
        let d = self.dim;
        let taylor = self.taylor(p)?;
        let mut out = vec![0.0; d];
        for (t, bar) in taylor.iter().zip(bars) {
            for (k, acc) in out.iter_mut().enumerate() {
                let mut s = bar.value * t.g[k];
                for i in 0..d {
                    s += bar.grad[i] * t.h[i][k];
                    for j in 0..d {
                        s += bar.hess[i][j] * t.t[i][j][k];
                    }
                }
                *acc += s;
            }
        }
        Ok(out)
    }
}
