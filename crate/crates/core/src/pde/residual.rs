use crate::diff::{Bars, Jet2};

/// A PDE residual written in terms of output jets at a point.
///
/// `residual_vjp` accumulates `Σ_k r_bar[k] · ∂r_k/∂(·)` into the bars, treating
/// each Hessian entry as an independent variable. Only the entries listed by
/// `hessian_pairs` may be read.
pub trait ResidualOperator: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    fn n_residuals(&self) -> usize {
        1
    }

    /// Number of learned problem scalars the residual reads.
    fn n_inverse(&self) -> usize {
        0
    }

    fn hessian_pairs(&self) -> Vec<(usize, usize)>;

    fn residual(&self, p: &[f64], jets: &[Jet2], inverse: &[f64], out: &mut [f64]);

    fn residual_vjp(&self, p: &[f64], jets: &[Jet2], inverse: &[f64], r_bar: &[f64], bars: &mut Bars<'_>);
}
