use super::batch::{JetLayout, Sweep};
use super::config::{LayerShape, MlpConfig};
use crate::diff::{Bars, DifferentiableField, Jet2, PassOutput, PointFunctional};
use crate::error::{Error, Result};

/// A tanh MLP bound to its layer layout. Parameters are passed in per call.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    cfg: MlpConfig,
    layers: Vec<LayerShape>,
    n_params: usize,
}

impl Mlp {
    pub fn new(cfg: MlpConfig) -> Result<Self> {
        cfg.validate()?;
        let layers = cfg.layers();
        let n_params = cfg.param_count();
        Ok(Mlp { cfg, layers, n_params })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.cfg
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.n_params
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.cfg.input_dim {
            return Err(Error::config(format!(
                "point has {} coordinates, network expects {}",
                p.len(),
                self.cfg.input_dim
            )));
        }
        Ok(())
    }

    pub fn forward(&self, theta: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_point(p)?;
        self.forward_batch(theta, p)
    }

    /// Outputs at every point, row-major `n × output_dim`.
    pub fn forward_batch(&self, theta: &[f64], points: &[f64]) -> Result<Vec<f64>> {
        let layout = JetLayout::value_only(self.cfg.input_dim);
        Ok(self.collect_jets(theta, points, &layout)?.iter().map(|j| j.value).collect())
    }

    pub fn forward_jet2(&self, theta: &[f64], p: &[f64]) -> Result<Vec<Jet2>> {
        self.check_point(p)?;
        self.collect_jets(theta, p, &JetLayout::full(self.cfg.input_dim))
    }
}

/// `Σ_o ⟨bar_o, jet_o⟩`, whose input gradient is the jet VJP.
struct Pairing<'a> {
    bars: &'a [Jet2],
}

impl PointFunctional for Pairing<'_> {
    fn eval(&self, _index: usize, _coords: &[f64], jets: &[Jet2], bars: Option<Bars<'_>>) -> f64 {
        let mut total = 0.0;
        for (jet, bar) in jets.iter().zip(self.bars) {
            let d = jet.dim;
            total += jet.value * bar.value;
            for i in 0..d {
                total += jet.grad[i] * bar.grad[i];
                for j in 0..d {
                    total += jet.hess[i][j] * bar.hess[i][j];
                }
            }
        }
        if let Some(out) = bars {
            out.jets.copy_from_slice(&self.bars[..out.jets.len()]);
        }
        total
    }
}

impl DifferentiableField for Mlp {
    fn input_dim(&self) -> usize {
        self.cfg.input_dim
    }

    fn output_dim(&self) -> usize {
        self.cfg.output_dim
    }

    fn param_len(&self) -> usize {
        self.n_params
    }

    fn eval(&self, p: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.forward(theta, p)
    }

    fn jet2(&self, p: &[f64], theta: &[f64]) -> Result<Vec<Jet2>> {
        self.forward_jet2(theta, p)
    }

    fn jet2_input_vjp(&self, p: &[f64], theta: &[f64], bars: &[Jet2]) -> Result<Vec<f64>> {
        self.check_point(p)?;
        if bars.len() != self.cfg.output_dim {
            return Err(Error::config("one adjoint jet per output required"));
        }
        let layout = JetLayout::full(self.cfg.input_dim);
        let out = self.jet_pass(theta, p, &layout, Sweep::INPUTS, &Pairing { bars })?;
        Ok(out.input_grads)
    }

    fn jets(&self, theta: &[f64], points: &[f64], pairs: &[(usize, usize)]) -> Result<Vec<Jet2>> {
        self.collect_jets(theta, points, &JetLayout::with_pairs(self.cfg.input_dim, pairs))
    }

    fn pointwise(
        &self,
        theta: &[f64],
        points: &[f64],
        pairs: &[(usize, usize)],
        functional: &dyn PointFunctional,
        input_grads: bool,
    ) -> Result<PassOutput> {
        let layout = JetLayout::with_pairs(self.cfg.input_dim, pairs);
        let sweep = Sweep { params: false, inputs: input_grads };
        self.jet_pass(theta, points, &layout, sweep, functional)
    }
}

/// `Σ_points functional(jets)` as a function of the network parameters.
pub struct PointwiseObjective<'a, F: PointFunctional + ?Sized> {
    pub mlp: &'a Mlp,
    pub points: &'a [f64],
    pub layout: JetLayout,
    pub functional: &'a F,
}

impl<F: PointFunctional + ?Sized> crate::diff::ParamObjective for PointwiseObjective<'_, F> {
    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let out = self.mlp.jet_pass(theta, self.points, &self.layout, Sweep::PARAMS, self.functional)?;
        Ok((out.total, out.param_grad))
    }
}
