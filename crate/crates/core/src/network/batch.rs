//! Batched jet propagation through the MLP.
//!
//! Input derivatives are pushed forward as truncated Taylor channels: for a
//! batch of `B` points every layer holds a `(C·B) × width` matrix whose row
//! blocks are the value, one first-derivative block per input coordinate, and
//! one block per requested second-derivative pair. Each affine layer is then a
//! single GEMM over all channels. Reverse accumulation through those channels
//! yields parameter gradients and input gradients of any pointwise functional
//! of the output jets; the input gradient of a functional of second
//! derivatives is how third-order input derivatives are obtained.

use std::cell::RefCell;

use rayon::prelude::*;

use super::activation;
use super::config::LayerShape;
use super::gemm::gemm;
use super::mlp::Mlp;
use crate::diff::{Bars, Jet2, PassOutput, PointFunctional, MAX_DIM};
use crate::error::{Error, Result};

/// GEMM rows per work unit, summed over channels. Larger chunks spill the
/// per-layer activations out of L2 and run markedly slower.
const CHUNK_ROWS: usize = 256;

/// Which Taylor channels a pass carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetLayout {
    dim: usize,
    first_order: bool,
    pairs: Vec<(usize, usize)>,
}

impl JetLayout {
    pub fn value_only(dim: usize) -> Self {
        JetLayout { dim, first_order: false, pairs: Vec::new() }
    }

    pub fn first_order(dim: usize) -> Self {
        JetLayout { dim, first_order: true, pairs: Vec::new() }
    }

    /// Gradient plus every Hessian entry on or above the diagonal.
    pub fn full(dim: usize) -> Self {
        let pairs = (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect();
        JetLayout { dim, first_order: true, pairs }
    }

    /// Gradient plus the listed Hessian entries; pairs are normalized to `i ≤ j`.
    pub fn with_pairs(dim: usize, pairs: &[(usize, usize)]) -> Self {
        let mut norm: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| if i <= j { (i, j) } else { (j, i) }).collect();
        norm.sort_unstable();
        norm.dedup();
        JetLayout { dim, first_order: true, pairs: norm }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> usize {
        1 + self.n_grad() + self.pairs.len()
    }

    /// Points per work unit.
    fn chunk_points(&self) -> usize {
        (CHUNK_ROWS / self.channels()).max(16)
    }

    fn n_grad(&self) -> usize {
        if self.first_order {
            self.dim
        } else {
            0
        }
    }
}

/// What the reverse sweep should produce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sweep {
    pub params: bool,
    pub inputs: bool,
}

impl Sweep {
    pub const NONE: Sweep = Sweep { params: false, inputs: false };
    pub const PARAMS: Sweep = Sweep { params: true, inputs: false };
    pub const INPUTS: Sweep = Sweep { params: false, inputs: true };

    fn any(self) -> bool {
        self.params || self.inputs
    }
}

#[derive(Default)]
struct Workspace {
    input: Vec<f64>,
    z: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
    out: Vec<f64>,
    out_bar: Vec<f64>,
    a_bar: Vec<f64>,
    z_bar: Vec<f64>,
    act: Vec<f64>,
}

thread_local! {
    static WORKSPACE: RefCell<Workspace> = RefCell::new(Workspace::default());
}

fn resize(buf: &mut Vec<f64>, len: usize) {
    buf.clear();
    buf.resize(len, 0.0);
}

struct ChunkResult {
    total: f64,
    param_grad: Vec<f64>,
    extra_grad: Vec<f64>,
}

impl Mlp {
    /// Evaluates `Σ_points functional(jets(point))` and, optionally, its gradients.
    ///
    /// `theta` must hold exactly the network parameters; `points` is row-major
    /// `n × input_dim`. Work is split into fixed chunks and reduced in order, so
    /// the result does not depend on the number of worker threads.
    pub fn jet_pass<F: PointFunctional + ?Sized>(
        &self,
        theta: &[f64],
        points: &[f64],
        layout: &JetLayout,
        sweep: Sweep,
        functional: &F,
    ) -> Result<PassOutput> {
        let cfg = self.config();
        let d = cfg.input_dim;
        if theta.len() != self.param_count() {
            return Err(Error::config(format!(
                "parameter vector has {} entries, network expects {}",
                theta.len(),
                self.param_count()
            )));
        }
        if layout.dim != d || !points.len().is_multiple_of(d) {
            return Err(Error::config(format!(
                "point dimension mismatch: network input_dim {d}, layout dim {}, {} coordinates",
                layout.dim,
                points.len()
            )));
        }
        if let Some(&(_, j)) = layout.pairs.iter().max_by_key(|p| p.1) {
            if j >= d {
                return Err(Error::config("Hessian pair index out of range"));
            }
        }
        let n = points.len() / d;
        let n_extra = functional.n_extra();
        let mut input_grads = if sweep.inputs { vec![0.0; n * d] } else { Vec::new() };

        let chunk = layout.chunk_points();
        let chunk_results: Vec<Result<ChunkResult>> = if sweep.inputs {
            points
                .par_chunks(chunk * d)
                .zip(input_grads.par_chunks_mut(chunk * d))
                .enumerate()
                .map(|(ci, (pts, ig))| self.run_chunk(theta, ci * chunk, pts, layout, sweep, functional, Some(ig)))
                .collect()
        } else {
            points
                .par_chunks(chunk * d)
                .enumerate()
                .map(|(ci, pts)| self.run_chunk(theta, ci * chunk, pts, layout, sweep, functional, None))
                .collect()
        };

        let mut out = PassOutput {
            total: 0.0,
            param_grad: if sweep.params { vec![0.0; theta.len()] } else { Vec::new() },
            extra_grad: vec![0.0; n_extra],
            input_grads: Vec::new(),
        };
        for res in chunk_results {
            let res = res?;
            out.total += res.total;
            if sweep.params {
                for (g, c) in out.param_grad.iter_mut().zip(&res.param_grad) {
                    *g += c;
                }
            }
            for (g, c) in out.extra_grad.iter_mut().zip(&res.extra_grad) {
                *g += c;
            }
        }
        out.input_grads = input_grads;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn run_chunk<F: PointFunctional + ?Sized>(
        &self,
        theta: &[f64],
        first_index: usize,
        points: &[f64],
        layout: &JetLayout,
        sweep: Sweep,
        functional: &F,
        mut input_grads: Option<&mut [f64]>,
    ) -> Result<ChunkResult> {
        WORKSPACE.with(|ws| {
            let mut ws = ws.borrow_mut();
            let b = points.len() / layout.dim;
            self.forward_chunk(theta, points, layout, &mut ws);
            let (total, extra_grad) =
                self.seed_chunk(first_index, points, layout, sweep, functional, &mut ws, input_grads.as_deref_mut())?;
            let mut param_grad = if sweep.params { vec![0.0; theta.len()] } else { Vec::new() };
            if sweep.any() {
                self.backward_chunk(theta, b, layout, &mut ws, &mut param_grad, input_grads);
            }
            Ok(ChunkResult { total, param_grad, extra_grad })
        })
    }

    fn forward_chunk(&self, theta: &[f64], points: &[f64], layout: &JetLayout, ws: &mut Workspace) {
        let d = layout.dim;
        let b = points.len() / d;
        let rows = layout.channels() * b;
        let ng = layout.n_grad();
        let layers = self.layers();
        let n_hidden = layers.len() - 1;

        resize(&mut ws.input, rows * d);
        ws.input[..b * d].copy_from_slice(points);
        for i in 0..ng {
            let block = &mut ws.input[(1 + i) * b * d..(2 + i) * b * d];
            for row in block.chunks_exact_mut(d) {
                row[i] = 1.0;
            }
        }

        ws.z.resize_with(n_hidden, Vec::new);
        ws.h.resize_with(n_hidden, Vec::new);
        for (l, layer) in layers.iter().enumerate() {
            if l == n_hidden {
                let mut out = std::mem::take(&mut ws.out);
                resize(&mut out, rows * layer.n_out);
                let a: &[f64] = if l == 0 { &ws.input } else { &ws.h[l - 1] };
                affine_forward(theta, layer, a, b, &mut out);
                ws.out = out;
            } else {
                let mut z = std::mem::take(&mut ws.z[l]);
                let mut h = std::mem::take(&mut ws.h[l]);
                resize(&mut z, rows * layer.n_out);
                resize(&mut h, rows * layer.n_out);
                let a: &[f64] = if l == 0 { &ws.input } else { &ws.h[l - 1] };
                affine_forward(theta, layer, a, b, &mut z);
                activate_forward(&z, &mut h, b, layer.n_out, ng, &layout.pairs, &mut ws.act);
                ws.z[l] = z;
                ws.h[l] = h;
            }
        }
    }

    /// Reads output jets, calls the functional, writes the output adjoints and
    /// any explicit coordinate gradients. Returns the chunk total and the
    /// extra-scalar gradient.
    #[allow(clippy::too_many_arguments)]
    fn seed_chunk<F: PointFunctional + ?Sized>(
        &self,
        first_index: usize,
        points: &[f64],
        layout: &JetLayout,
        sweep: Sweep,
        functional: &F,
        ws: &mut Workspace,
        mut input_grads: Option<&mut [f64]>,
    ) -> Result<(f64, Vec<f64>)> {
        let d = layout.dim;
        let b = points.len() / d;
        let n_out = self.config().output_dim;
        let ng = layout.n_grad();
        let n_extra = functional.n_extra();
        let mut total = 0.0;
        let mut extra_grad = vec![0.0; n_extra];
        let mut extra_bar = vec![0.0; n_extra];
        let mut jets = [Jet2::zero(d); 3];
        let mut bars = [Jet2::zero(d); 3];
        let mut coords_bar = [0.0; MAX_DIM];
        if sweep.any() {
            resize(&mut ws.out_bar, ws.out.len());
        }
        for p in 0..b {
            for (o, jet) in jets.iter_mut().enumerate().take(n_out) {
                *jet = Jet2::zero(d);
                jet.value = ws.out[p * n_out + o];
                for i in 0..ng {
                    jet.grad[i] = ws.out[((1 + i) * b + p) * n_out + o];
                }
                for (k, &(i, j)) in layout.pairs.iter().enumerate() {
                    let v = ws.out[((1 + ng + k) * b + p) * n_out + o];
                    jet.hess[i][j] = v;
                    jet.hess[j][i] = v;
                }
            }
            let coords = &points[p * d..(p + 1) * d];
            let contribution = if sweep.any() {
                for bar in bars.iter_mut().take(n_out) {
                    *bar = Jet2::zero(d);
                }
                extra_bar.iter_mut().for_each(|e| *e = 0.0);
                coords_bar[..d].iter_mut().for_each(|e| *e = 0.0);
                let v = functional.eval(
                    first_index + p,
                    coords,
                    &jets[..n_out],
                    Some(Bars { jets: &mut bars[..n_out], extra: &mut extra_bar, coords: &mut coords_bar[..d] }),
                );
                for (g, e) in extra_grad.iter_mut().zip(&extra_bar) {
                    *g += e;
                }
                for (o, bar) in bars.iter().enumerate().take(n_out) {
                    ws.out_bar[p * n_out + o] = bar.value;
                    for i in 0..ng {
                        ws.out_bar[((1 + i) * b + p) * n_out + o] = bar.grad[i];
                    }
                    for (k, &(i, j)) in layout.pairs.iter().enumerate() {
                        let mut v = bar.hess[i][j];
                        if i != j {
                            v += bar.hess[j][i];
                        }
                        ws.out_bar[((1 + ng + k) * b + p) * n_out + o] = v;
                    }
                }
                if let Some(ig) = input_grads.as_deref_mut() {
                    ig[p * d..(p + 1) * d].copy_from_slice(&coords_bar[..d]);
                }
                v
            } else {
                functional.eval(first_index + p, coords, &jets[..n_out], None)
            };
            if !contribution.is_finite() {
                return Err(Error::numeric(
                    "non-finite pointwise contribution",
                    format!("point {} at {:?}", first_index + p, coords),
                ));
            }
            total += contribution;
        }
        Ok((total, extra_grad))
    }

    /// Reverse sweep from the output adjoints in `ws.out_bar`.
    fn backward_chunk(
        &self,
        theta: &[f64],
        b: usize,
        layout: &JetLayout,
        ws: &mut Workspace,
        param_grad: &mut [f64],
        input_grads: Option<&mut [f64]>,
    ) {
        let rows = layout.channels() * b;
        let ng = layout.n_grad();
        let layers = self.layers();

        // Adjoint of the current layer's pre-activation output.
        let mut g = std::mem::take(&mut ws.out_bar);
        let mut spare = std::mem::take(&mut ws.z_bar);
        let mut a_bar = std::mem::take(&mut ws.a_bar);
        for l in (0..layers.len()).rev() {
            let layer = &layers[l];
            let w = &theta[layer.w_offset..layer.b_offset];
            if !param_grad.is_empty() {
                let a: &[f64] = if l == 0 { &ws.input } else { &ws.h[l - 1] };
                let (w_grad, rest) = param_grad[layer.w_offset..].split_at_mut(layer.n_in * layer.n_out);
                // W̄ += Z̄ᵀ A over every channel row.
                gemm(layer.n_out, rows, layer.n_in, &g, 1, layer.n_out, a, layer.n_in, 1, 1.0, w_grad, layer.n_in);
                let b_grad = &mut rest[..layer.n_out];
                for row in g[..b * layer.n_out].chunks_exact(layer.n_out) {
                    for (acc, v) in b_grad.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
            }
            if l == 0 {
                if let Some(ig) = input_grads {
                    // Only the value rows of the input carry the coordinates.
                    resize(&mut a_bar, b * layer.n_in);
                    gemm(b, layer.n_out, layer.n_in, &g, layer.n_out, 1, w, layer.n_in, 1, 0.0, &mut a_bar, layer.n_in);
                    for (acc, v) in ig.iter_mut().zip(&a_bar) {
                        *acc += v;
                    }
                }
                break;
            }
            resize(&mut a_bar, rows * layer.n_in);
            gemm(rows, layer.n_out, layer.n_in, &g, layer.n_out, 1, w, layer.n_in, 1, 0.0, &mut a_bar, layer.n_in);
            resize(&mut spare, rows * layer.n_in);
            activate_backward(
                &ws.z[l - 1],
                &ws.h[l - 1],
                &a_bar,
                &mut spare,
                b,
                layer.n_in,
                ng,
                &layout.pairs,
                &mut ws.act,
            );
            std::mem::swap(&mut g, &mut spare);
        }
        ws.out_bar = g;
        ws.z_bar = spare;
        ws.a_bar = a_bar;
    }
}

fn affine_forward(theta: &[f64], layer: &LayerShape, a: &[f64], b: usize, z: &mut [f64]) {
    let rows = a.len() / layer.n_in;
    let w = &theta[layer.w_offset..layer.b_offset];
    let bias = &theta[layer.b_offset..layer.b_offset + layer.n_out];
    // Z = A Wᵀ, W stored row-major n_out × n_in.
    gemm(rows, layer.n_in, layer.n_out, a, layer.n_in, 1, w, 1, layer.n_in, 0.0, z, layer.n_out);
    for row in z[..b * layer.n_out].chunks_exact_mut(layer.n_out) {
        for (v, bb) in row.iter_mut().zip(bias) {
            *v += bb;
        }
    }
}

/// Pushes the Taylor channels through tanh.
#[allow(clippy::too_many_arguments)]
fn activate_forward(
    z: &[f64],
    h: &mut [f64],
    b: usize,
    w: usize,
    ng: usize,
    pairs: &[(usize, usize)],
    scratch: &mut Vec<f64>,
) {
    resize(scratch, 2 * w);
    let (s, s2) = scratch.split_at_mut(w);
    let row = |ch: usize, p: usize| (ch * b + p) * w;
    for p in 0..b {
        let r0 = row(0, p);
        for u in 0..w {
            let t = activation::tanh(z[r0 + u]);
            h[r0 + u] = t;
            let sech2 = 1.0 - t * t;
            s[u] = sech2;
            s2[u] = -2.0 * t * sech2;
        }
        for i in 0..ng {
            let r = row(1 + i, p);
            for u in 0..w {
                h[r + u] = s[u] * z[r + u];
            }
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let rk = row(1 + ng + k, p);
            let ri = row(1 + i, p);
            let rj = row(1 + j, p);
            for u in 0..w {
                h[rk + u] = s2[u] * z[ri + u] * z[rj + u] + s[u] * z[rk + u];
            }
        }
    }
}

/// Reverse of [`activate_forward`]: maps output-channel adjoints to pre-activation adjoints.
#[allow(clippy::too_many_arguments)]
fn activate_backward(
    z: &[f64],
    h: &[f64],
    h_bar: &[f64],
    z_bar: &mut [f64],
    b: usize,
    w: usize,
    ng: usize,
    pairs: &[(usize, usize)],
    scratch: &mut Vec<f64>,
) {
    resize(scratch, 5 * w);
    let (s, rest) = scratch.split_at_mut(w);
    let (s2, rest) = rest.split_at_mut(w);
    let (s3, rest) = rest.split_at_mut(w);
    let (acc, hb_s2) = rest.split_at_mut(w);
    let row = |ch: usize, p: usize| (ch * b + p) * w;
    for p in 0..b {
        let r0 = row(0, p);
        let (h0, hb0) = (&h[r0..r0 + w], &h_bar[r0..r0 + w]);
        for u in 0..w {
            let t = h0[u];
            let sech2 = 1.0 - t * t;
            s[u] = sech2;
            s2[u] = -2.0 * t * sech2;
            s3[u] = -2.0 * sech2 * sech2 + 4.0 * t * t * sech2;
            acc[u] = hb0[u] * sech2;
        }
        for i in 0..ng {
            let r = row(1 + i, p);
            let (hb, zr) = (&h_bar[r..r + w], &z[r..r + w]);
            let zb = &mut z_bar[r..r + w];
            for u in 0..w {
                acc[u] += hb[u] * s2[u] * zr[u];
                zb[u] = hb[u] * s[u];
            }
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let (rk, ri, rj) = (row(1 + ng + k, p), row(1 + i, p), row(1 + j, p));
            let (hb, zi, zj, zk) = (&h_bar[rk..rk + w], &z[ri..ri + w], &z[rj..rj + w], &z[rk..rk + w]);
            {
                let zbk = &mut z_bar[rk..rk + w];
                for u in 0..w {
                    acc[u] += hb[u] * (s3[u] * zi[u] * zj[u] + s2[u] * zk[u]);
                    hb_s2[u] = hb[u] * s2[u];
                    zbk[u] = hb[u] * s[u];
                }
            }
            let zbi = &mut z_bar[ri..ri + w];
            for u in 0..w {
                zbi[u] += hb_s2[u] * zj[u];
            }
            let zbj = &mut z_bar[rj..rj + w];
            for u in 0..w {
                zbj[u] += hb_s2[u] * zi[u];
            }
        }
        z_bar[r0..r0 + w].copy_from_slice(acc);
    }
}

impl Mlp {
    /// Output jets at every point, row-major `n × output_dim`.
    pub fn collect_jets(&self, theta: &[f64], points: &[f64], layout: &JetLayout) -> Result<Vec<Jet2>> {
        let d = self.config().input_dim;
        if theta.len() != self.param_count() || layout.dim != d || !points.len().is_multiple_of(d) {
            return Err(Error::config(format!(
                "collect_jets: expected {} parameters and {d}-dimensional points",
                self.param_count()
            )));
        }
        let n_out = self.config().output_dim;
        let ng = layout.n_grad();
        let chunks: Vec<Vec<Jet2>> = points
            .par_chunks(layout.chunk_points() * d)
            .map(|pts| {
                WORKSPACE.with(|ws| {
                    let mut ws = ws.borrow_mut();
                    self.forward_chunk(theta, pts, layout, &mut ws);
                    let b = pts.len() / d;
                    let mut jets = Vec::with_capacity(b * n_out);
                    for p in 0..b {
                        for o in 0..n_out {
                            let mut jet = Jet2::zero(d);
                            jet.value = ws.out[p * n_out + o];
                            for i in 0..ng {
                                jet.grad[i] = ws.out[((1 + i) * b + p) * n_out + o];
                            }
                            for (k, &(i, j)) in layout.pairs.iter().enumerate() {
                                let v = ws.out[((1 + ng + k) * b + p) * n_out + o];
                                jet.hess[i][j] = v;
                                jet.hess[j][i] = v;
                            }
                            jets.push(jet);
                        }
                    }
                    jets
                })
            })
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }
}
