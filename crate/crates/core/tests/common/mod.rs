//! Shared oracles for the integration tests: central finite differences and
//! a straight-line scalar MLP that does not share code with the batched path.
#![allow(dead_code)]

use pinnbench::network::{MlpConfig, ParameterVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Step used by every finite-difference oracle: 1e-4 scaled by coordinate magnitude.
pub fn fd_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian of a vector function, row per output.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
    let mut xp = x.to_vec();
    let n_out = f(x).len();
    let mut jac = vec![vec![0.0; x.len()]; n_out];
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        xp[i] = x[i] + h;
        let up = f(&xp);
        xp[i] = x[i] - h;
        let down = f(&xp);
        xp[i] = x[i];
        for o in 0..n_out {
            jac[o][i] = (up[o] - down[o]) / (2.0 * h);
        }
    }
    jac
}

/// Relative error with an absolute floor so near-zero entries compare sensibly.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| rel_err(*x, *y)).fold(0.0, f64::max)
}

/// Plain nested-loop forward pass with libm tanh.
pub fn reference_forward(cfg: &MlpConfig, theta: &[f64], x: &[f64]) -> Vec<f64> {
    let layers = cfg.layers();
    let mut a = x.to_vec();
    for (l, layer) in layers.iter().enumerate() {
        let mut z = vec![0.0; layer.n_out];
        for o in 0..layer.n_out {
            let mut s = theta[layer.b_offset + o];
            for i in 0..layer.n_in {
                s += theta[layer.w_offset + o * layer.n_in + i] * a[i];
            }
            z[o] = if l + 1 == layers.len() { s } else { s.tanh() };
        }
        a = z;
    }
    a
}

/// A random small network: up to three hidden layers of width ≤ 16, perturbed biases.
pub fn random_net(rng: &mut ChaCha8Rng, input_dim: usize, output_dim: usize) -> (MlpConfig, ParameterVector) {
    let depth = rng.random_range(1..=3);
    let hidden = (0..depth).map(|_| rng.random_range(2..=16)).collect();
    let cfg = MlpConfig::new(input_dim, output_dim, hidden);
    let mut theta = ParameterVector::glorot(&cfg, rng.random());
    for v in theta.as_mut_slice() {
        *v += rng.random_range(-0.3..0.3);
    }
    (cfg, theta)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.5..1.5)).collect()
}
