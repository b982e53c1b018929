use super::collocation::{CollocationSet, Origin};
use crate::pde::DomainBox;

/// Per-axis counts in `{b, b+1}` with the largest product not exceeding `n`,
/// where `b = ⌊n^{1/d}⌋`; extra counts go to the leading axes.
pub fn grid_counts(n: usize, dim: usize) -> Vec<usize> {
    assert!(n >= 1 && dim >= 1);
    let fits = |b: usize| b.checked_pow(dim as u32).is_some_and(|p| p <= n);
    let mut b = (n as f64).powf(1.0 / dim as f64).round() as usize + 1;
    while !fits(b) {
        b -= 1;
    }
    let mut counts = vec![b; dim];
    for k in 0..dim {
        counts[k] += 1;
        if counts.iter().product::<usize>() > n {
            counts[k] -= 1;
            break;
        }
    }
    counts
}

/// Equispaced tensor grid including the box faces, last axis varying fastest.
/// An axis with a single node sits at the box center.
pub fn uniform_grid(n: usize, domain: &DomainBox) -> CollocationSet {
    let d = domain.dim();
    let counts = grid_counts(n, d);
    let total: usize = counts.iter().product();
    let mut points = Vec::with_capacity(total * d);
    let mut index = vec![0usize; d];
    for _ in 0..total {
        for k in 0..d {
            let (lo, hi) = (domain.lower()[k], domain.upper()[k]);
            let x = if counts[k] == 1 {
                0.5 * (lo + hi)
            } else if index[k] + 1 == counts[k] {
                hi
            } else {
                lo + (hi - lo) * index[k] as f64 / (counts[k] - 1) as f64
            };
            points.push(x);
        }
        for k in (0..d).rev() {
            index[k] += 1;
            if index[k] < counts[k] {
                break;
            }
            index[k] = 0;
        }
    }
    CollocationSet::new(d, points, Origin::Initial)
}

const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

/// Van der Corput radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    acc
}

/// Hammersley points in the unit cube: `(i/n, φ₂(i), φ₃(i), φ₅(i), …)`.
pub fn hammersley_unit(n: usize, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len() + 1);
    let mut out = Vec::with_capacity(n * dim);
    for i in 0..n {
        out.push(i as f64 / n as f64);
        for &base in &PRIMES[..dim - 1] {
            out.push(radical_inverse(i as u64, base));
        }
    }
    out
}

/// The first `n` Hammersley points mapped onto the box.
pub fn hammersley(n: usize, domain: &DomainBox) -> CollocationSet {
    let d = domain.dim();
    let unit = hammersley_unit(n, d);
    let mut points = vec![0.0; unit.len()];
    for (u, p) in unit.chunks_exact(d).zip(points.chunks_exact_mut(d)) {
        domain.from_unit(u, p);
    }
    CollocationSet::new(d, points, Origin::Initial)
}
