use super::jet::Jet2;

/// Result of a pointwise pass over a set of points.
#[derive(Clone, Debug, Default)]
pub struct PassOutput {
    /// Sum of the per-point contributions, reduced in point order.
    pub total: f64,
    /// Gradient of `total` w.r.t. the field parameters (empty unless requested).
    pub param_grad: Vec<f64>,
    /// Gradient of `total` w.r.t. the extra scalars handed to the functional.
    pub extra_grad: Vec<f64>,
    /// Row-major `n × dim` gradients of each point's own contribution w.r.t. its coordinates.
    pub input_grads: Vec<f64>,
}

/// Per-point callback of a jet pass.
///
/// Receives the point index, its coordinates, and the output jets; returns the
/// point's contribution. When `bars` is present it must also write the partial
/// derivatives of that contribution w.r.t. the jets (Hessian entries treated as
/// independent variables), w.r.t. the extra scalars, and w.r.t. any explicit
/// dependence on the coordinates. All bars arrive zeroed.
pub trait PointFunctional: Sync {
    fn n_extra(&self) -> usize {
        0
    }

    fn eval(&self, index: usize, coords: &[f64], jets: &[Jet2], bars: Option<Bars<'_>>) -> f64;
}

/// Adjoint outputs for one point.
pub struct Bars<'a> {
    pub jets: &'a mut [Jet2],
    pub extra: &'a mut [f64],
    pub coords: &'a mut [f64],
}

impl Bars<'_> {
    pub fn reborrow(&mut self) -> Bars<'_> {
        Bars { jets: self.jets, extra: self.extra, coords: self.coords }
    }
}
