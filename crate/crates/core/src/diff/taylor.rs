//! Third-order truncated multivariate Taylor numbers.
//!
//! Closed-form fields (exact solutions, manufactured data, test landscapes) are
//! written once against [`Taylor3`] and get value, gradient, Hessian, and the
//! third derivative tensor in a single evaluation. The third-order part feeds
//! input gradients of squared residuals.

use std::ops::{Add, Mul, Neg, Sub};

use super::jet::MAX_DIM;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor3 {
    pub dim: usize,
    pub v: f64,
    pub g: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
    pub t: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

impl Taylor3 {
    pub fn constant(dim: usize, v: f64) -> Self {
        assert!(dim <= MAX_DIM, "Taylor3 supports at most {MAX_DIM} variables");
        Taylor3 { dim, v, g: [0.0; MAX_DIM], h: [[0.0; MAX_DIM]; MAX_DIM], t: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM] }
    }

    /// The coordinate function `x_index` evaluated at `v`.
    pub fn variable(dim: usize, index: usize, v: f64) -> Self {
        let mut out = Taylor3::constant(dim, v);
        out.g[index] = 1.0;
        out
    }

    /// Seeds one variable per coordinate of `p`.
    pub fn variables(p: &[f64]) -> Vec<Taylor3> {
        p.iter().enumerate().map(|(i, &v)| Taylor3::variable(p.len(), i, v)).collect()
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    /// Applies a scalar function given its value and first three derivatives at `self.v`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Self {
        let n = self.dim;
        let mut out = Taylor3::constant(n, f0);
        for i in 0..n {
            out.g[i] = f1 * self.g[i];
            for j in 0..n {
                out.h[i][j] = f2 * self.g[i] * self.g[j] + f1 * self.h[i][j];
                for k in 0..n {
                    out.t[i][j][k] = f3 * self.g[i] * self.g[j] * self.g[k]
                        + f2 * (self.h[i][j] * self.g[k] + self.h[i][k] * self.g[j] + self.h[j][k] * self.g[i])
                        + f1 * self.t[i][j][k];
                }
            }
        }
        out
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e, e)
    }

    pub fn tanh(&self) -> Self {
        let y = self.v.tanh();
        let s = 1.0 - y * y;
        self.compose(y, s, -2.0 * y * s, -2.0 * s * s + 4.0 * y * y * s)
    }

    pub fn powi(&self, n: i32) -> Self {
        let x = self.v;
        let nf = f64::from(n);
        self.compose(
            x.powi(n),
            nf * x.powi(n - 1),
            nf * (nf - 1.0) * x.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * x.powi(n - 3),
        )
    }

    fn zip(self, rhs: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        out.v = f(self.v, rhs.v);
        for i in 0..self.dim {
            out.g[i] = f(self.g[i], rhs.g[i]);
            for j in 0..self.dim {
                out.h[i][j] = f(self.h[i][j], rhs.h[i][j]);
                for k in 0..self.dim {
                    out.t[i][j][k] = f(self.t[i][j][k], rhs.t[i][j][k]);
                }
            }
        }
        out
    }

    fn scale(self, a: f64) -> Self {
        let zero = Taylor3::constant(self.dim, 0.0);
        self.zip(zero, |x, _| a * x)
    }
}

impl Add for Taylor3 {
    type Output = Taylor3;
    fn add(self, rhs: Taylor3) -> Taylor3 {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for Taylor3 {
    type Output = Taylor3;
    fn sub(self, rhs: Taylor3) -> Taylor3 {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for Taylor3 {
    type Output = Taylor3;
    fn neg(self) -> Taylor3 {
        self.scale(-1.0)
    }
}

impl Mul for Taylor3 {
    type Output = Taylor3;
    fn mul(self, b: Taylor3) -> Taylor3 {
        let a = self;
        let n = a.dim;
        let mut out = Taylor3::constant(n, a.v * b.v);
        for i in 0..n {
            out.g[i] = a.g[i] * b.v + a.v * b.g[i];
            for j in 0..n {
                out.h[i][j] = a.h[i][j] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[i][j];
                for k in 0..n {
                    out.t[i][j][k] = a.t[i][j][k] * b.v
                        + a.h[i][j] * b.g[k]
                        + a.h[i][k] * b.g[j]
                        + a.h[j][k] * b.g[i]
                        + a.g[i] * b.h[j][k]
                        + a.g[j] * b.h[i][k]
                        + a.g[k] * b.h[i][j]
                        + a.v * b.t[i][j][k];
                }
            }
        }
        out
    }
}

impl Add<f64> for Taylor3 {
    type Output = Taylor3;
    fn add(mut self, rhs: f64) -> Taylor3 {
        self.v += rhs;
        self
    }
}

impl Sub<f64> for Taylor3 {
    type Output = Taylor3;
    fn sub(mut self, rhs: f64) -> Taylor3 {
        self.v -= rhs;
        self
    }
}

impl Mul<f64> for Taylor3 {
    type Output = Taylor3;
    fn mul(self, rhs: f64) -> Taylor3 {
        self.scale(rhs)
    }
}

impl Mul<Taylor3> for f64 {
    type Output = Taylor3;
    fn mul(self, rhs: Taylor3) -> Taylor3 {
        rhs.scale(self)
    }
}

impl Add<Taylor3> for f64 {
    type Output = Taylor3;
    fn add(self, rhs: Taylor3) -> Taylor3 {
        rhs + self
    }
}

impl Sub<Taylor3> for f64 {
    type Output = Taylor3;
    fn sub(self, rhs: Taylor3) -> Taylor3 {
        -rhs + self
    }
}
