/// Largest input dimension supported by the fixed-size jet storage.
pub const MAX_DIM: usize = 5;

/// Value, input gradient, and input Hessian of one scalar output at one point.
///
/// Only the leading `dim` entries of `grad` and the leading `dim × dim` block of
/// `hess` are meaningful. When used as an adjoint ("bar") the Hessian entries are
/// treated as independent variables, so a cotangent may be non-symmetric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub dim: usize,
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet2 {
    pub fn zero(dim: usize) -> Self {
        debug_assert!(dim <= MAX_DIM);
        Jet2 { dim, value: 0.0, grad: [0.0; MAX_DIM], hess: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Jet2 { value, ..Jet2::zero(dim) }
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad().iter().all(|g| g.is_finite())
            && (0..self.dim).all(|i| self.hess[i][..self.dim].iter().all(|h| h.is_finite()))
    }

    /// Largest relative asymmetry `|H_ij - H_ji| / max(1, |H_ij|, |H_ji|)`.
    pub fn hessian_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let (a, b) = (self.hess[i][j], self.hess[j][i]);
                let scale = 1f64.max(a.abs()).max(b.abs());
                worst = worst.max((a - b).abs() / scale);
            }
        }
        worst
    }

    /// `a * self + b * other`, entrywise.
    pub fn combine(&self, a: f64, other: &Jet2, b: f64) -> Jet2 {
        let mut out = Jet2::zero(self.dim);
        out.value = a * self.value + b * other.value;
        for i in 0..self.dim {
            out.grad[i] = a * self.grad[i] + b * other.grad[i];
            for j in 0..self.dim {
                out.hess[i][j] = a * self.hess[i][j] + b * other.hess[i][j];
            }
        }
        out
    }
}
