use std::f64::consts::PI;

use super::residual::ResidualOperator;
use crate::diff::{Bars, Jet2};

/// `u_t + u·u_x − ν·u_xx` over `(x, t)`.
#[derive(Clone, Copy, Debug)]
pub struct Burgers {
    pub nu: f64,
}

impl ResidualOperator for Burgers {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn hessian_pairs(&self) -> Vec<(usize, usize)> {
        vec![(0, 0)]
    }

    fn residual(&self, _p: &[f64], jets: &[Jet2], _inverse: &[f64], out: &mut [f64]) {
        let u = &jets[0];
        out[0] = u.grad[1] + u.value * u.grad[0] - self.nu * u.hess[0][0];
    }

    fn residual_vjp(&self, _p: &[f64], jets: &[Jet2], _: &[f64], r_bar: &[f64], bars: &mut Bars<'_>) {
        let u = &jets[0];
        let rb = r_bar[0];
        let b = &mut bars.jets[0];
        b.value += rb * u.grad[0];
        b.grad[0] += rb * u.value;
        b.grad[1] += rb;
        b.hess[0][0] -= rb * self.nu;
    }
}

/// `u_t − d·u_xx − 5(u − u³)` over `(x, t)`.
#[derive(Clone, Copy, Debug)]
pub struct AllenCahn {
    pub d: f64,
}

impl ResidualOperator for AllenCahn {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn hessian_pairs(&self) -> Vec<(usize, usize)> {
        vec![(0, 0)]
    }

    fn residual(&self, _p: &[f64], jets: &[Jet2], _inverse: &[f64], out: &mut [f64]) {
        let u = &jets[0];
        let v = u.value;
        out[0] = u.grad[1] - self.d * u.hess[0][0] - 5.0 * (v - v * v * v);
    }

    fn residual_vjp(&self, _p: &[f64], jets: &[Jet2], _: &[f64], r_bar: &[f64], bars: &mut Bars<'_>) {
        let v = jets[0].value;
        let rb = r_bar[0];
        let b = &mut bars.jets[0];
        b.value -= rb * 5.0 * (1.0 - 3.0 * v * v);
        b.grad[1] += rb;
        b.hess[0][0] -= rb * self.d;
    }
}

/// `−Δv − 5π² Π sin(πxᵢ)` on five coordinates.
#[derive(Clone, Copy, Debug, Default)]
pub struct Poisson5;

impl Poisson5 {
    pub const DIM: usize = 5;

    pub fn forcing(p: &[f64]) -> f64 {
        5.0 * PI * PI * p.iter().map(|x| (PI * x).sin()).product::<f64>()
    }
}

impl ResidualOperator for Poisson5 {
    fn input_dim(&self) -> usize {
        Self::DIM
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn hessian_pairs(&self) -> Vec<(usize, usize)> {
        (0..Self::DIM).map(|i| (i, i)).collect()
    }

    fn residual(&self, p: &[f64], jets: &[Jet2], _inverse: &[f64], out: &mut [f64]) {
        let v = &jets[0];
        let lap: f64 = (0..Self::DIM).map(|i| v.hess[i][i]).sum();
        out[0] = -lap - Self::forcing(p);
    }

    fn residual_vjp(&self, p: &[f64], _jets: &[Jet2], _: &[f64], r_bar: &[f64], bars: &mut Bars<'_>) {
        let rb = r_bar[0];
        for i in 0..Self::DIM {
            bars.jets[0].hess[i][i] -= rb;
        }
        let s: Vec<f64> = p.iter().map(|x| (PI * x).sin()).collect();
        for k in 0..Self::DIM {
            let others: f64 = (0..Self::DIM).filter(|&i| i != k).map(|i| s[i]).product();
            bars.coords[k] -= rb * 5.0 * PI * PI * PI * (PI * p[k]).cos() * others;
        }
    }
}

/// Both momentum residuals over `(x, y, t)` with outputs `(u, v, p)`.
///
/// With `learned` set, `λ1, λ2` are read from the inverse scalars and receive
/// adjoints; otherwise the fixed fields are used.
#[derive(Clone, Copy, Debug)]
pub struct NavierStokes {
    pub lambda1: f64,
    pub lambda2: f64,
    pub learned: bool,
}

impl NavierStokes {
    fn lambdas(&self, inverse: &[f64]) -> (f64, f64) {
        if self.learned {
            (inverse[0], inverse[1])
        } else {
            (self.lambda1, self.lambda2)
        }
    }
}

impl ResidualOperator for NavierStokes {
    fn input_dim(&self) -> usize {
        3
    }

    fn output_dim(&self) -> usize {
        3
    }

    fn n_residuals(&self) -> usize {
        2
    }

    fn n_inverse(&self) -> usize {
        if self.learned {
            2
        } else {
            0
        }
    }

    fn hessian_pairs(&self) -> Vec<(usize, usize)> {
        vec![(0, 0), (1, 1)]
    }

    fn residual(&self, _p: &[f64], jets: &[Jet2], inverse: &[f64], out: &mut [f64]) {
        let (l1, l2) = self.lambdas(inverse);
        let (u, v, p) = (&jets[0], &jets[1], &jets[2]);
        out[0] = u.grad[2] + l1 * (u.value * u.grad[0] + v.value * u.grad[1]) + p.grad[0]
            - l2 * (u.hess[0][0] + u.hess[1][1]);
        out[1] = v.grad[2] + l1 * (u.value * v.grad[0] + v.value * v.grad[1]) + p.grad[1]
            - l2 * (v.hess[0][0] + v.hess[1][1]);
    }

    fn residual_vjp(&self, _p: &[f64], jets: &[Jet2], inverse: &[f64], r_bar: &[f64], bars: &mut Bars<'_>) {
        let (l1, l2) = self.lambdas(inverse);
        let (u, v) = (&jets[0], &jets[1]);
        let (a, b) = (r_bar[0], r_bar[1]);
        {
            let ub = &mut bars.jets[0];
            ub.value += l1 * (a * u.grad[0] + b * v.grad[0]);
            ub.grad[0] += a * l1 * u.value;
            ub.grad[1] += a * l1 * v.value;
            ub.grad[2] += a;
            ub.hess[0][0] -= a * l2;
            ub.hess[1][1] -= a * l2;
        }
        {
            let vb = &mut bars.jets[1];
            vb.value += l1 * (a * u.grad[1] + b * v.grad[1]);
            vb.grad[0] += b * l1 * u.value;
            vb.grad[1] += b * l1 * v.value;
            vb.grad[2] += b;
            vb.hess[0][0] -= b * l2;
            vb.hess[1][1] -= b * l2;
        }
        bars.jets[2].grad[0] += a;
        bars.jets[2].grad[1] += b;
        if self.learned {
            let conv_u = u.value * u.grad[0] + v.value * u.grad[1];
            let conv_v = u.value * v.grad[0] + v.value * v.grad[1];
            bars.extra[0] += a * conv_u + b * conv_v;
            bars.extra[1] -= a * (u.hess[0][0] + u.hess[1][1]) + b * (v.hess[0][0] + v.hess[1][1]);
        }
    }
}
