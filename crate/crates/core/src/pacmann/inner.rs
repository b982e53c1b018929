use super::config::{PacmannConfig, PointOptimizer};
use crate::diff::MAX_DIM;
use crate::error::{Error, Result};

/// Per-point moment buffers and step counter of the stateful update rules.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointState {
    pub v: [f64; MAX_DIM],
    pub s: [f64; MAX_DIM],
    pub step: u32,
}

impl PointState {
    pub fn is_zero(&self) -> bool {
        self.step == 0 && self.v.iter().chain(&self.s).all(|&x| x == 0.0)
    }
}

/// One coordinatewise ascent step of `x` along the squared-residual gradient `g`.
///
/// Golden section is a line search, not a per-step rule; see
/// [`super::golden_section_move`].
pub fn inner_step(
    kind: PointOptimizer,
    x: &mut [f64],
    g: &[f64],
    state: &mut PointState,
    cfg: &PacmannConfig,
) -> Result<()> {
    if let Some(k) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite squared-residual gradient", format!("coordinate {k} at {x:?}")));
    }
    let s = cfg.stepsize;
    let eps = cfg.eps;
    state.step += 1;
    let i = state.step as i32;
    match kind {
        PointOptimizer::GradientAscent => {
            for (x, g) in x.iter_mut().zip(g) {
                *x += s * g;
            }
        }
        PointOptimizer::NonlinearGa => {
            for (x, g) in x.iter_mut().zip(g) {
                *x += s * g.tanh();
            }
        }
        PointOptimizer::Rmsprop => {
            let b = cfg.rmsprop_beta;
            for k in 0..x.len() {
                state.s[k] = b * state.s[k] + (1.0 - b) * g[k] * g[k];
                x[k] += s * g[k] / (state.s[k] + eps).sqrt();
            }
        }
        PointOptimizer::Momentum => {
            let b = cfg.momentum_beta;
            for k in 0..x.len() {
                state.v[k] = b * state.v[k] + (1.0 - b) * g[k];
                x[k] += s * state.v[k];
            }
        }
        PointOptimizer::Adam => {
            let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
            let c1 = 1.0 - b1.powi(i);
            let c2 = 1.0 - b2.powi(i);
            for k in 0..x.len() {
                state.v[k] = b1 * state.v[k] + (1.0 - b1) * g[k];
                state.s[k] = b2 * state.s[k] + (1.0 - b2) * g[k] * g[k];
                x[k] += s * (state.v[k] / c1) / (state.s[k] / c2 + eps).sqrt();
            }
        }
        PointOptimizer::GoldenSection => {
            return Err(Error::config("golden section search has no single-step update"));
        }
    }
    Ok(())
}
