use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::collocation::{CollocationSet, Origin};
use crate::error::{Error, Result};
use crate::pde::DomainBox;

/// `n` i.i.d. uniform points tagged `initial`.
pub fn resample_random(n: usize, domain: &DomainBox, seed: u64) -> CollocationSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CollocationSet::new(domain.dim(), domain.sample(&mut rng, n), Origin::Initial)
}

fn check_pool(set_dim: usize, pool: &[f64], residuals: &[f64]) -> Result<()> {
    if pool.len() != residuals.len() * set_dim {
        return Err(Error::config(format!(
            "pool holds {} coordinates for {} residuals in dimension {set_dim}",
            pool.len(),
            residuals.len()
        )));
    }
    Ok(())
}

/// Indices of the `m` largest `|r|`, ties to the lower index.
pub fn top_residuals(residuals: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..residuals.len()).collect();
    order.sort_by(|&a, &b| residuals[b].abs().total_cmp(&residuals[a].abs()).then(a.cmp(&b)));
    order.truncate(m);
    order
}

/// Appends the `m` pool points with the largest residual magnitude.
pub fn rar_step(set: &CollocationSet, pool: &[f64], residuals: &[f64], m: usize) -> Result<CollocationSet> {
    let d = set.dim();
    check_pool(d, pool, residuals)?;
    let mut out = set.clone();
    for i in top_residuals(residuals, m) {
        out.push(&pool[i * d..(i + 1) * d], Origin::Added);
    }
    Ok(out)
}

/// RAD weights `|r|^k / mean(|r|^k) + c`; an all-zero residual vector gives uniform weights.
pub fn rad_weights(residuals: &[f64], k: f64, c: f64) -> Vec<f64> {
    let powered: Vec<f64> = residuals.iter().map(|r| r.abs().powf(k)).collect();
    let mean = powered.iter().sum::<f64>() / powered.len().max(1) as f64;
    if !(mean > 0.0) || !mean.is_finite() {
        return vec![1.0; residuals.len()];
    }
    powered.iter().map(|p| p / mean + c).collect()
}

/// `m` distinct indices drawn with probability proportional to `weights`,
/// in draw order: each index gets the key `E/w` with `E ~ Exp(1)`, and keys
/// are taken in increasing order (ties to the lower index).
pub fn weighted_without_replacement<R: Rng + ?Sized>(weights: &[f64], m: usize, rng: &mut R) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.random();
            let e = -(1.0 - u).ln();
            let key = if w > 0.0 { e / w } else { f64::INFINITY };
            (key, i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().take(m).map(|(_, i)| i).collect()
}

fn check_rad(k: f64, c: f64) -> Result<()> {
    if !(k >= 0.0) || !(c >= 0.0) || !k.is_finite() || !c.is_finite() {
        return Err(Error::config("RAD exponent k and offset c must be finite and non-negative"));
    }
    Ok(())
}

/// Replaces the whole set by `n` pool points drawn from the RAD density, tagged `replaced`.
pub fn rad_resample(
    n: usize,
    dim: usize,
    pool: &[f64],
    residuals: &[f64],
    k: f64,
    c: f64,
    seed: u64,
) -> Result<CollocationSet> {
    check_pool(dim, pool, residuals)?;
    check_rad(k, c)?;
    if residuals.len() < n {
        return Err(Error::config(format!(
            "RAD pool of {} points cannot supply {n} draws without replacement",
            residuals.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = weighted_without_replacement(&rad_weights(residuals, k, c), n, &mut rng);
    let mut points = Vec::with_capacity(n * dim);
    for i in picks {
        points.extend_from_slice(&pool[i * dim..(i + 1) * dim]);
    }
    Ok(CollocationSet::new(dim, points, Origin::Replaced))
}

/// Appends `m` pool points drawn from the RAD density.
pub fn rard_step(
    set: &CollocationSet,
    pool: &[f64],
    residuals: &[f64],
    m: usize,
    k: f64,
    c: f64,
    seed: u64,
) -> Result<CollocationSet> {
    let d = set.dim();
    check_pool(d, pool, residuals)?;
    check_rad(k, c)?;
    if residuals.len() < m {
        return Err(Error::config("RAR-D pool smaller than the number of additions"));
    }
    let mut out = set.clone();
    if m == 0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in weighted_without_replacement(&rad_weights(residuals, k, c), m, &mut rng) {
        out.push(&pool[i * d..(i + 1) * d], Origin::Added);
    }
    Ok(out)
}
