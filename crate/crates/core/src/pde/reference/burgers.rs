use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::ReferenceSolution;
use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Hermite rule for weight `e^{−z²}`,
/// nodes in descending order.
///
/// Nodes are eigenvalues of the Jacobi matrix, polished by Newton steps on the
/// orthonormal Hermite recurrence; weights are `2 / (√(2n)·p_{n−1})²`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PI_M4: f64 = 0.751_125_544_464_942_5;
    let jacobi =
        DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| b.total_cmp(a));
    let nf = n as f64;
    // p_n(z) and the derivative scale √(2n)·p_{n−1}(z).
    let eval = |z: f64| {
        let (mut p1, mut p2) = (PI_M4, 0.0);
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = nodes[i];
        for _ in 0..3 {
            let (p, dp) = eval(z);
            z -= p / dp;
        }
        let (_, dp) = eval(z);
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (dp * dp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Cole–Hopf solution of `u_t + u·u_x = ν·u_xx` on `[−1,1] × [0,∞)` with
/// `u(x,0) = −sin(πx)` and zero boundary values.
#[derive(Clone, Debug)]
pub struct ColeHopf {
    nu: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ColeHopf {
    pub const NODES: usize = 200;

    pub fn new(nu: f64) -> Self {
        let (nodes, weights) = gauss_hermite(Self::NODES);
        ColeHopf { nu, nodes, weights }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !(x.abs() <= 1.0) {
            return Err(Error::Domain(format!("Burgers reference undefined at x={x}, t={t}")));
        }
        if t == 0.0 {
            return Ok(-(PI * x).sin());
        }
        let c = (4.0 * self.nu * t).sqrt();
        let k = 1.0 / (2.0 * PI * self.nu);
        // The heat kernel factor reaches e^{1/(2πν)}; shift exponents by their maximum.
        let shift = self.nodes.iter().map(|z| -(PI * (x - c * z)).cos() * k).fold(f64::NEG_INFINITY, f64::max);
        let mut num = 0.0;
        let mut den = 0.0;
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            let y = x - c * z;
            let f = w * (-(PI * y).cos() * k - shift).exp();
            num += (PI * y).sin() * f;
            den += f;
        }
        Ok(-num / den)
    }
}

impl ReferenceSolution for ColeHopf {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.eval(p[0], p[1])?;
        Ok(())
    }
}
