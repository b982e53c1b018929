use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// L-BFGS settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbfgsConfig {
    /// Curvature pairs kept.
    pub history: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_trials: usize,
    /// Pairs with `yᵀs ≤ curvature_eps·|y||s|` are skipped.
    pub curvature_eps: f64,
    /// Largest displacement of the fallback gradient step.
    pub fallback_step: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig { history: 50, c1: 1e-4, c2: 0.9, max_trials: 25, curvature_eps: 1e-10, fallback_step: 1e-3 }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.history == 0 || self.max_trials == 0 {
            return Err(Error::config("L-BFGS history and max_trials must be at least 1"));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::config(format!("L-BFGS needs 0 < c1 < c2 < 1, got {} and {}", self.c1, self.c2)));
        }
        if !(self.fallback_step > 0.0) || !(self.curvature_eps >= 0.0) {
            return Err(Error::config("L-BFGS fallback_step must be positive and curvature_eps non-negative"));
        }
        Ok(())
    }
}

/// How an iteration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// A strong-Wolfe step along the quasi-Newton direction.
    Wolfe,
    /// The line search failed and a bounded gradient step decreased the loss.
    Fallback,
    /// Neither produced a decrease; the iterate is unchanged.
    Stalled,
    /// The gradient is exactly zero.
    Converged,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationInfo {
    pub kind: StepKind,
    pub evaluations: usize,
    pub step: f64,
}

/// Objective returning value and gradient.
pub type Objective<'a> = dyn FnMut(&[f64]) -> Result<(f64, Vec<f64>)> + 'a;

struct Trial {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Limited-memory BFGS with a strong-Wolfe line search.
#[derive(Clone, Debug)]
pub struct Lbfgs {
    cfg: LbfgsConfig,
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    rho: VecDeque<f64>,
    skipped: usize,
    warnings: usize,
}

impl Lbfgs {
    pub fn new(cfg: LbfgsConfig) -> Self {
        Lbfgs { cfg, s: VecDeque::new(), y: VecDeque::new(), rho: VecDeque::new(), skipped: 0, warnings: 0 }
    }

    pub fn config(&self) -> &LbfgsConfig {
        &self.cfg
    }

    pub fn history_len(&self) -> usize {
        self.s.len()
    }

    /// Curvature pairs rejected so far.
    pub fn skipped_pairs(&self) -> usize {
        self.skipped
    }

    /// Line-search failures so far.
    pub fn warnings(&self) -> usize {
        self.warnings
    }

    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.rho.clear();
    }

    /// `−H·g` by the two-loop recursion.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let k = self.s.len();
        let mut q = g.to_vec();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            alpha[i] = self.rho[i] * dot(&self.s[i], &q);
            for (qj, yj) in q.iter_mut().zip(&self.y[i]) {
                *qj -= alpha[i] * yj;
            }
        }
        if k > 0 {
            let gamma = dot(&self.s[k - 1], &self.y[k - 1]) / dot(&self.y[k - 1], &self.y[k - 1]);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let beta = self.rho[i] * dot(&self.y[i], &q);
            for (qj, sj) in q.iter_mut().zip(&self.s[i]) {
                *qj += (alpha[i] - beta) * sj;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    fn push_pair(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if !(sy > self.cfg.curvature_eps * norm(&s) * norm(&y)) {
            self.skipped += 1;
            return;
        }
        if self.s.len() == self.cfg.history {
            self.s.pop_front();
            self.y.pop_front();
            self.rho.pop_front();
        }
        self.rho.push_back(1.0 / sy);
        self.s.push_back(s);
        self.y.push_back(y);
    }

    /// One iteration from `(x, f, g)`, updating all three in place.
    ///
    /// Numeric errors from trial points count as failed trials; errors of any
    /// other kind are returned.
    pub fn step(
        &mut self,
        x: &mut Vec<f64>,
        f: &mut f64,
        g: &mut Vec<f64>,
        obj: &mut Objective<'_>,
    ) -> Result<IterationInfo> {
        if g.iter().all(|v| *v == 0.0) {
            return Ok(IterationInfo { kind: StepKind::Converged, evaluations: 0, step: 0.0 });
        }
        let mut d = self.direction(g);
        let mut slope = dot(g, &d);
        if !(slope < 0.0) {
            self.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(g, &d);
        }
        let alpha0 = if self.s.is_empty() { (1.0 / norm(g)).min(1.0) } else { 1.0 };
        let mut evaluations = 0;
        let found = self.line_search(x, *f, slope, &d, alpha0, obj, &mut evaluations)?;
        let (kind, trial, dir) = match found {
            Some(t) => (StepKind::Wolfe, t, d),
            None => {
                self.warnings += 1;
                log::warn!("L-BFGS line search failed; taking a bounded gradient step");
                self.clear();
                let dir: Vec<f64> = g.iter().map(|v| -v).collect();
                match self.fallback(x, *f, g, &dir, obj, &mut evaluations)? {
                    Some(t) => (StepKind::Fallback, t, dir),
                    None => return Ok(IterationInfo { kind: StepKind::Stalled, evaluations, step: 0.0 }),
                }
            }
        };
        let s: Vec<f64> = dir.iter().map(|v| trial.alpha * v).collect();
        let y: Vec<f64> = trial.g.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        *f = trial.f;
        *g = trial.g;
        self.push_pair(s, y);
        Ok(IterationInfo { kind, evaluations, step: trial.alpha })
    }

    fn evaluate(x: &[f64], d: &[f64], alpha: f64, obj: &mut Objective<'_>, count: &mut usize) -> Result<Trial> {
        *count += 1;
        let xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        match obj(&xt) {
            Ok((f, g)) if f.is_finite() && g.iter().all(|v| v.is_finite()) => {
                let slope = dot(&g, d);
                Ok(Trial { alpha, f, g, slope })
            }
            Ok(_) | Err(Error::Numeric { .. }) => Ok(Trial { alpha, f: f64::INFINITY, g: Vec::new(), slope: f64::NAN }),
            Err(e) => Err(e),
        }
    }

    /// Bracketing phase followed by zoom; `None` when the budget runs out.
    #[allow(clippy::too_many_arguments)]
    fn line_search(
        &self,
        x: &[f64],
        f0: f64,
        slope0: f64,
        d: &[f64],
        alpha0: f64,
        obj: &mut Objective<'_>,
        count: &mut usize,
    ) -> Result<Option<Trial>> {
        let (c1, c2) = (self.cfg.c1, self.cfg.c2);
        let armijo = |t: &Trial| t.f <= f0 + c1 * t.alpha * slope0;
        let curvature = |t: &Trial| t.slope.abs() <= -c2 * slope0;
        let mut prev = Trial { alpha: 0.0, f: f0, g: Vec::new(), slope: slope0 };
        let mut alpha = alpha0;
        let (mut lo, mut hi);
        loop {
            if *count >= self.cfg.max_trials {
                return Ok(None);
            }
            let t = Self::evaluate(x, d, alpha, obj, count)?;
            if !armijo(&t) || (prev.alpha > 0.0 && t.f >= prev.f) {
                (lo, hi) = (prev, t);
                break;
            }
            if curvature(&t) {
                return Ok(Some(t));
            }
            if t.slope >= 0.0 {
                (lo, hi) = (t, prev);
                break;
            }
            alpha *= 2.0;
            prev = t;
        }
        // Invariant: lo satisfies Armijo with the lowest value seen; the
        // interval between lo and hi holds a strong-Wolfe point.
        while *count < self.cfg.max_trials {
            let a = interpolate(&lo, &hi);
            if !(a - lo.alpha).abs().is_normal() || (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1e-16) {
                return Ok(None);
            }
            let t = Self::evaluate(x, d, a, obj, count)?;
            if !armijo(&t) || t.f >= lo.f {
                hi = t;
            } else {
                if curvature(&t) {
                    return Ok(Some(t));
                }
                if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
        Ok(None)
    }

    /// Steepest descent with displacement at most `fallback_step`, halved until the value drops.
    fn fallback(
        &self,
        x: &[f64],
        f0: f64,
        g: &[f64],
        dir: &[f64],
        obj: &mut Objective<'_>,
        count: &mut usize,
    ) -> Result<Option<Trial>> {
        let mut alpha = (self.cfg.fallback_step / norm(g)).min(1.0);
        for _ in 0..20 {
            let t = Self::evaluate(x, dir, alpha, obj, count)?;
            if t.f < f0 {
                return Ok(Some(t));
            }
            alpha *= 0.5;
        }
        Ok(None)
    }
}

/// Safeguarded cubic interpolation on `[lo, hi]`, bisection when the cubic is unusable.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let (left, right) = (a.min(b), a.max(b));
    let margin = 0.1 * (right - left);
    let mid = 0.5 * (a + b);
    if !hi.f.is_finite() || !hi.slope.is_finite() {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let c = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    if c.is_finite() && c >= left + margin && c <= right - margin {
        c
    } else {
        mid
    }
}

/// Runs up to `iterations` steps from `x`, returning the final value and per-iteration info.
pub fn minimize(
    x: &mut Vec<f64>,
    cfg: LbfgsConfig,
    iterations: usize,
    obj: &mut Objective<'_>,
) -> Result<(f64, Vec<IterationInfo>)> {
    let (mut f, mut g) = obj(x)?;
    let mut solver = Lbfgs::new(cfg);
    let mut infos = Vec::new();
    for _ in 0..iterations {
        let info = solver.step(x, &mut f, &mut g, obj)?;
        infos.push(info);
        if matches!(info.kind, StepKind::Stalled | StepKind::Converged) {
            break;
        }
    }
    Ok((f, infos))
}
