use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{PacmannConfig, PointOptimizer};
use super::golden::GoldenBracket;
use super::inner::{inner_step, PointState};
use crate::error::{Error, Result};
use crate::pde::{DomainBox, ResidualLandscape};
use crate::samplers::{CollocationSet, Origin};

/// One PACMANN event: every point climbs the frozen squared-residual surface.
///
/// A point that leaves the closed box is replaced at once by a uniform draw
/// (tagged `replaced`) and takes no further steps. Optimizer state starts at
/// zero. Replacement draws come from `seed` in point order, step by step.
pub fn pacmann_move(
    set: &CollocationSet,
    domain: &DomainBox,
    landscape: &ResidualLandscape<'_>,
    cfg: &PacmannConfig,
    seed: u64,
) -> Result<CollocationSet> {
    if !(cfg.stepsize >= 0.0) || !cfg.stepsize.is_finite() {
        return Err(Error::config("PACMANN stepsize must be finite and non-negative"));
    }
    if cfg.steps == 0 || cfg.stepsize == 0.0 {
        return Ok(set.clone());
    }
    if set.dim() != domain.dim() {
        return Err(Error::config("collocation set dimension differs from the box"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cfg.optimizer {
        PointOptimizer::GoldenSection => golden_event(set, domain, landscape, cfg, &mut rng),
        kind => stepped_event(kind, set, domain, landscape, cfg, &mut rng),
    }
}

fn gather(set: &CollocationSet, ids: &[usize]) -> Vec<f64> {
    ids.iter().flat_map(|&i| set.point(i).iter().copied()).collect()
}

fn checked_grads(landscape: &ResidualLandscape<'_>, set: &CollocationSet, ids: &[usize]) -> Result<Vec<f64>> {
    let d = set.dim();
    let grads = landscape.sq_residual_grads_unchecked(&gather(set, ids))?;
    if let Some(k) = grads.iter().position(|g| !g.is_finite()) {
        let i = ids[k / d];
        return Err(Error::numeric(
            "non-finite squared-residual gradient",
            format!("collocation point {i} at {:?}", set.point(i)),
        ));
    }
    Ok(grads)
}

fn replace(out: &mut CollocationSet, i: usize, domain: &DomainBox, rng: &mut ChaCha8Rng) {
    let mut p = Vec::with_capacity(domain.dim());
    domain.sample_into(rng, &mut p);
    out.set(i, &p, Origin::Replaced);
}

fn stepped_event(
    kind: PointOptimizer,
    set: &CollocationSet,
    domain: &DomainBox,
    landscape: &ResidualLandscape<'_>,
    cfg: &PacmannConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CollocationSet> {
    let d = set.dim();
    let mut out = set.clone();
    let mut states = vec![PointState::default(); set.len()];
    assert!(states.iter().all(PointState::is_zero), "optimizer state must start at zero");
    let mut active: Vec<usize> = (0..set.len()).collect();
    let mut x = vec![0.0; d];
    for _ in 0..cfg.steps {
        if active.is_empty() {
            break;
        }
        let grads = checked_grads(landscape, &out, &active)?;
        let mut still = Vec::with_capacity(active.len());
        for (k, &i) in active.iter().enumerate() {
            x.copy_from_slice(out.point(i));
            inner_step(kind, &mut x, &grads[k * d..(k + 1) * d], &mut states[i], cfg)?;
            if domain.contains(&x) {
                let origin = out.origins()[i];
                out.set(i, &x, origin);
                still.push(i);
            } else {
                replace(&mut out, i, domain, rng);
            }
        }
        active = still;
    }
    Ok(out)
}

fn golden_event(
    set: &CollocationSet,
    domain: &DomainBox,
    landscape: &ResidualLandscape<'_>,
    cfg: &PacmannConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CollocationSet> {
    let d = set.dim();
    let s = cfg.stepsize;
    let all: Vec<usize> = (0..set.len()).collect();
    let grads = checked_grads(landscape, set, &all)?;
    let moving: Vec<usize> = all.into_iter().filter(|&i| grads[i * d..(i + 1) * d].iter().any(|&g| g != 0.0)).collect();
    let along = |i: usize, xi: f64, buf: &mut Vec<f64>| {
        for (x, g) in set.point(i).iter().zip(&grads[i * d..(i + 1) * d]) {
            buf.push(x + xi * s * g);
        }
    };
    let values_at = |xis: &[f64]| -> Result<Vec<f64>> {
        let mut buf = Vec::with_capacity(moving.len() * d);
        for (&i, &xi) in moving.iter().zip(xis) {
            along(i, xi, &mut buf);
        }
        landscape.sq_residuals(&buf)
    };
    let (xl, xr) = GoldenBracket::interior(0.0, 1.0);
    let fl = values_at(&vec![xl; moving.len()])?;
    let fr = values_at(&vec![xr; moving.len()])?;
    let mut brackets: Vec<GoldenBracket> =
        fl.iter().zip(&fr).map(|(&l, &r)| GoldenBracket::start(0.0, 1.0, l, r)).collect();
    for k in 0..cfg.steps {
        let probes: Vec<f64> = brackets.iter_mut().map(GoldenBracket::shrink).collect();
        if k + 1 < cfg.steps {
            for (b, v) in brackets.iter_mut().zip(values_at(&probes)?) {
                b.probe(v);
            }
        }
    }
    let mut out = set.clone();
    let mut p = Vec::with_capacity(d);
    for (&i, b) in moving.iter().zip(&brackets) {
        p.clear();
        along(i, b.midpoint(), &mut p);
        if domain.contains(&p) {
            let origin = out.origins()[i];
            out.set(i, &p, origin);
        } else {
            replace(&mut out, i, domain, rng);
        }
    }
    Ok(out)
}
