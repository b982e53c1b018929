//! The acceptance suite: one line per criterion, each checked at its stated
//! tolerance and CPU-time budget.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 1 2 7`. Failed criteria make the process
//! exit non-zero only with `PINNBENCH_ACCEPTANCE_STRICT=1`.

mod common;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use common::*;
use pinnbench::bench::{run_experiment, ExperimentConfig, ExperimentOutcome, Preset, SamplerKind};
use pinnbench::diff::{
    eval_jet2, input_gradient_sq_residual, param_gradient, AnalyticField, Bars, Jet2, ParamObjective, PointFunctional,
    Taylor3,
};
use pinnbench::evaluation::{read_results, RunStatus};
use pinnbench::network::{JetLayout, Mlp, PointwiseObjective};
use pinnbench::pacmann::{
    golden_section_move, inner_step, pacmann_move, GoldenBracket, PacmannConfig, PointOptimizer, PointState, INV_PHI,
};
use pinnbench::pde::{DomainBox, PdeProblem, ProblemKind, ResidualLandscape, ResidualOperator};
use pinnbench::samplers::{hammersley, hammersley_unit, rad_resample, Origin};
use pinnbench::trainer::lbfgs::minimize;
use pinnbench::trainer::LbfgsConfig;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// CPU seconds consumed by this process across all threads.
fn cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "process CPU clock unavailable");
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

// ---------------------------------------------------------------- criterion 1

/// r = Σ_o u_o + u_0 ∂₀u_0 − 0.3 ∂₀₀u_0 + 0.2 ∂₀₁u_0 + sin(x₀).
struct MixedResidual {
    dim: usize,
    outputs: usize,
}

impl ResidualOperator for MixedResidual {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn output_dim(&self) -> usize {
        self.outputs
    }
    fn hessian_pairs(&self) -> Vec<(usize, usize)> {
        vec![(0, 0), (0, 1)]
    }
    fn residual(&self, p: &[f64], jets: &[Jet2], _inv: &[f64], out: &mut [f64]) {
        let u = &jets[0];
        let sum: f64 = jets.iter().map(|j| j.value).sum();
        out[0] = sum + u.value * u.grad[0] - 0.3 * u.hess[0][0] + 0.2 * u.hess[0][1] + p[0].sin();
    }
    fn residual_vjp(&self, p: &[f64], jets: &[Jet2], _inv: &[f64], r_bar: &[f64], bars: &mut Bars<'_>) {
        let rb = r_bar[0];
        let u = jets[0];
        for b in bars.jets.iter_mut() {
            b.value += rb;
        }
        let b = &mut bars.jets[0];
        b.value += rb * u.grad[0];
        b.grad[0] += rb * u.value;
        b.hess[0][0] -= 0.3 * rb;
        b.hess[0][1] += 0.2 * rb;
        bars.coords[0] += rb * p[0].cos();
    }
}

/// Σ over points of (u_0 + ½ ∂₀u_0 + ∂₀₁u_0)².
struct MixedFunctional;

impl PointFunctional for MixedFunctional {
    fn eval(&self, _i: usize, _c: &[f64], jets: &[Jet2], bars: Option<Bars<'_>>) -> f64 {
        let u = &jets[0];
        let q = u.value + 0.5 * u.grad[0] + u.hess[0][1];
        if let Some(b) = bars {
            b.jets[0].value = 2.0 * q;
            b.jets[0].grad[0] = q;
            b.jets[0].hess[0][1] = 2.0 * q;
        }
        q * q
    }
}

fn criterion_1() -> Check {
    let mut rng = rng(2024);
    let (mut first, mut second, mut third) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let d = rng.random_range(2..=5);
        let outputs = rng.random_range(1..=3);
        let (cfg, theta) = random_net(&mut rng, d, outputs);
        let mlp = Mlp::new(cfg).map_err(|e| e.to_string())?;
        let th = theta.as_slice();
        let p = random_point(&mut rng, d);

        // Input gradient and Hessian of every output.
        let jets = eval_jet2(&mlp, &p, th).map_err(|e| e.to_string())?;
        for (o, jet) in jets.iter().enumerate() {
            let value = |x: &[f64]| mlp.forward(th, x).unwrap()[o];
            first = first.max(max_rel_err(jet.grad(), &fd_gradient(value, &p)));
            let grad = |x: &[f64]| mlp.forward_jet2(th, x).unwrap()[o].grad().to_vec();
            let hess = fd_jacobian(grad, &p);
            for i in 0..d {
                second = second.max(max_rel_err(&jet.hess[i][..d], &hess[i]));
            }
        }

        // Parameter gradient of a value-only loss (first order).
        let points: Vec<f64> = (0..3).flat_map(|_| random_point(&mut rng, d)).collect();
        let value_sq =
            |th: &[f64]| -> f64 { points.chunks_exact(d).map(|x| mlp.forward(th, x).unwrap()[0].powi(2)).sum() };
        let layout = JetLayout::value_only(d);
        struct ValueSquared;
        impl PointFunctional for ValueSquared {
            fn eval(&self, _i: usize, _c: &[f64], jets: &[Jet2], bars: Option<Bars<'_>>) -> f64 {
                if let Some(b) = bars {
                    b.jets[0].value = 2.0 * jets[0].value;
                }
                jets[0].value * jets[0].value
            }
        }
        let obj = PointwiseObjective { mlp: &mlp, points: &points, layout, functional: &ValueSquared };
        let g = param_gradient(&obj, th).map_err(|e| e.to_string())?;
        first = first.max(max_rel_err(&g, &fd_gradient(value_sq, th)));

        // Parameter gradient of a loss on second derivatives (third order overall).
        let obj = PointwiseObjective {
            mlp: &mlp,
            points: &points,
            layout: JetLayout::with_pairs(d, &[(0, 1)]),
            functional: &MixedFunctional,
        };
        let g = param_gradient(&obj, th).map_err(|e| e.to_string())?;
        let fd = fd_gradient(|t| obj.value_and_gradient(t).unwrap().0, th);
        third = third.max(max_rel_err(&g, &fd));

        // Input gradient of a squared residual with Hessian terms (third order).
        let op = MixedResidual { dim: d, outputs };
        let g = input_gradient_sq_residual(&op, &mlp, &p, th, &[]).map_err(|e| e.to_string())?;
        let r2 = |x: &[f64]| {
            let jets = mlp.forward_jet2(th, x).unwrap();
            let mut r = [0.0];
            op.residual(x, &jets, &[], &mut r);
            r[0] * r[0]
        };
        third = third.max(max_rel_err(&g, &fd_gradient(r2, &p)));
    }
    ensure(first < 1e-5, || format!("first-order rel err {first:.2e} ≥ 1e-5"))?;
    ensure(second < 1e-4, || format!("second-order rel err {second:.2e} ≥ 1e-4"))?;
    ensure(third < 1e-4, || format!("third-order rel err {third:.2e} ≥ 1e-4"))?;
    Ok(format!("20 nets; max rel err 1st {first:.1e}, 2nd {second:.1e}, 3rd {third:.1e}"))
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2() -> Check {
    let mut rng = rng(7);
    let mut worst = Vec::new();
    let mut cases: Vec<(String, PdeProblem, AnalyticField, Vec<f64>)> = Vec::new();
    for kind in [ProblemKind::Poisson, ProblemKind::NavierStokes] {
        let problem = PdeProblem::registry(kind).map_err(|e| e.to_string())?;
        let field = problem.exact_field().ok_or("missing exact field")?;
        let truth = problem.inverse.iter().map(|s| s.truth).collect();
        cases.push((kind.to_string(), problem, field, truth));
    }
    // Allen–Cahn: the fixed points u ≡ 0 and u ≡ ±1 of the reaction term.
    for c in [0.0, 1.0, -1.0] {
        let problem = PdeProblem::registry(ProblemKind::AllenCahn).map_err(|e| e.to_string())?;
        let field = AnalyticField::new(2, 1, move |v: &[Taylor3]| vec![Taylor3::constant(v[0].dim, c)]);
        cases.push((format!("allen_cahn u={c}"), problem, field, Vec::new()));
    }
    for (name, problem, field, truth) in &cases {
        let mut max = 0.0f64;
        let lo = problem.domain.lower();
        let hi = problem.domain.upper();
        for _ in 0..100 {
            // Strictly interior points.
            let p: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random_range(0.01..0.99)).collect();
            let jets = eval_jet2(field, &p, &[]).map_err(|e| e.to_string())?;
            let mut r = vec![0.0; problem.residual.n_residuals()];
            problem.residual.residual(&p, &jets, truth, &mut r);
            max = r.iter().fold(max, |m, v| m.max(v.abs()));
        }
        ensure(max < 1e-6, || format!("{name}: |r| = {max:.2e}"))?;
        worst.push(format!("{name} {max:.0e}"));
    }
    Ok(format!("max |r| over 100 points: {}", worst.join(", ")))
}

// ---------------------------------------------------------------- criterion 3

/// Straight-line three-step trajectory of each rule on r² = −(x − a)².
fn rule_oracle(kind: PointOptimizer, x0: f64, a: f64, s: f64) -> Vec<f64> {
    let mut xs = vec![x0];
    let (mut v, mut sq) = (0.0, 0.0);
    for i in 1..=3 {
        let x = xs[i - 1];
        let g = -2.0 * (x - a);
        xs.push(match kind {
            PointOptimizer::GradientAscent => x + s * g,
            PointOptimizer::NonlinearGa => x + s * g.tanh(),
            PointOptimizer::Rmsprop => {
                sq = 0.999 * sq + 0.001 * g * g;
                x + s * g / (sq + 1e-8).sqrt()
            }
            PointOptimizer::Momentum => {
                v = 0.9 * v + 0.1 * g;
                x + s * v
            }
            PointOptimizer::Adam => {
                v = 0.9 * v + 0.1 * g;
                sq = 0.999 * sq + 0.001 * g * g;
                x + s * (v / (1.0 - 0.9f64.powi(i as i32))) / (sq / (1.0 - 0.999f64.powi(i as i32)) + 1e-8).sqrt()
            }
            PointOptimizer::GoldenSection => unreachable!(),
        });
    }
    xs
}

/// Relative agreement to 1e-12; `1 − β` in f64 is not the decimal it denotes.
fn close_12(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Golden section by brute force: recompute both probes from the bracket each shrink.
fn golden_oracle(f: impl Fn(f64) -> f64, t: usize) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..t {
        let xl = a + (1.0 - INV_PHI) * (b - a);
        let xr = a + INV_PHI * (b - a);
        if f(xl) > f(xr) {
            b = xr;
        } else {
            a = xl;
        }
    }
    0.5 * (a + b)
}

fn criterion_3() -> Check {
    let mut worst = 0.0f64;
    for kind in PointOptimizer::ALL {
        for (x0, a, s) in [(0.1, 0.6, 0.05), (-0.4, 0.3, 0.2), (0.9, -0.2, 0.01)] {
            let cfg = PacmannConfig::new(kind, s, 3);
            if kind == PointOptimizer::GoldenSection {
                // Three events of T = 3 golden shrinks along the current gradient.
                let target = |x: f64| -(x - a) * (x - a);
                let mut x = x0;
                for _ in 0..3 {
                    let g = -2.0 * (x - a);
                    let got = golden_section_move(&[x], &[g], |p| target(p[0]), s, 3)[0];
                    let xi = golden_oracle(|xi| target(x + xi * s * g), 3);
                    worst = worst.max((got - (x + xi * s * g)).abs());
                    x = got;
                }
                continue;
            }
            let expected = rule_oracle(kind, x0, a, s);
            let mut st = PointState::default();
            let mut x = [x0];
            for want in &expected[1..] {
                let g = [-2.0 * (x[0] - a)];
                inner_step(kind, &mut x, &g, &mut st, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max((x[0] - want).abs());
            }
        }
    }
    ensure(worst < 1e-12, || format!("trajectory deviation {worst:.2e}"))?;

    // First-step closed forms.
    for g in [3.0, -0.02, 1.0] {
        let mut st = PointState::default();
        let mut x = [0.0];
        inner_step(
            PointOptimizer::Momentum,
            &mut x,
            &[g],
            &mut st,
            &PacmannConfig::new(PointOptimizer::Momentum, 0.01, 1),
        )
        .map_err(|e| e.to_string())?;
        // Bitwise against the update as written, to 1e-12 against the decimal form.
        ensure(st.v[0] == (1.0 - 0.9) * g && close_12(st.v[0], 0.1 * g), || {
            format!("momentum V1 = {} for g = {g}", st.v[0])
        })?;

        let mut st = PointState::default();
        let mut x = [0.0];
        inner_step(
            PointOptimizer::Rmsprop,
            &mut x,
            &[g],
            &mut st,
            &PacmannConfig::new(PointOptimizer::Rmsprop, 1e-3, 1),
        )
        .map_err(|e| e.to_string())?;
        ensure(st.s[0] == (1.0 - 0.999) * g * g && close_12(st.s[0], 0.001 * g * g), || {
            format!("RMSprop S1 = {} for g = {g}", st.s[0])
        })?;

        // Bias correction cancels: the first Adam step is s·g/√(g² + ε).
        let mut st = PointState::default();
        let mut x = [0.25];
        inner_step(PointOptimizer::Adam, &mut x, &[g], &mut st, &PacmannConfig::new(PointOptimizer::Adam, 0.01, 1))
            .map_err(|e| e.to_string())?;
        let want = 0.25 + 0.01 * g / (g * g + 1e-8).sqrt();
        let step = x[0] - 0.25;
        ensure(step.signum() == g.signum() && (x[0] - want).abs() <= 1e-15, || {
            format!("Adam first step {} vs {want}", x[0])
        })?;
    }
    Ok(format!("6 rules × 3 trajectories, max deviation {worst:.1e}; first-step closed forms hold"))
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4() -> Check {
    let f = |xi: f64| -(xi - 0.3) * (xi - 0.3);
    let got = golden_section_move(&[0.0], &[1.0], |p| f(p[0]), 1.0, 20)[0];
    ensure((got - 0.3).abs() <= 2e-4, || format!("argmax {got}"))?;

    let (xl, xr) = GoldenBracket::interior(0.0, 1.0);
    let mut bracket = GoldenBracket::start(0.0, 1.0, f(xl), f(xr));
    let mut width = bracket.width();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let probe = bracket.shrink();
        bracket.probe(f(probe));
        worst = worst.max((bracket.width() / width - INV_PHI).abs());
        width = bracket.width();
    }
    ensure(worst < 1e-9, || format!("shrink ratio deviates from φ⁻¹ by {worst:.2e}"))?;
    Ok(format!("argmax {got:.6} (|err| {:.1e}); shrink ratio within {worst:.0e} of φ⁻¹", (got - 0.3).abs()))
}

// ---------------------------------------------------------------- criterion 5

/// r = u with u = exp(−(x² + y²)/2), so r² = exp(−(x² + y²)).
struct ValueResidual;

impl ResidualOperator for ValueResidual {
    fn input_dim(&self) -> usize {
        2
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn hessian_pairs(&self) -> Vec<(usize, usize)> {
        Vec::new()
    }
    fn residual(&self, _p: &[f64], jets: &[Jet2], _inv: &[f64], out: &mut [f64]) {
        out[0] = jets[0].value;
    }
    fn residual_vjp(&self, _p: &[f64], _jets: &[Jet2], _inv: &[f64], r_bar: &[f64], bars: &mut Bars<'_>) {
        bars.jets[0].value += r_bar[0];
    }
}

fn criterion_5() -> Check {
    let square = DomainBox::cube(2, -1.0, 1.0).map_err(|e| e.to_string())?;
    let field = AnalyticField::new(2, 1, |v: &[Taylor3]| vec![((v[0] * v[0] + v[1] * v[1]) * -0.5).exp()]);
    let land = ResidualLandscape { op: &ValueResidual, field: &field, theta: &[], inverse: &[] };
    let initial = hammersley(1000, &square);
    let mean = |pts: &[f64]| -> Result<f64, String> {
        let r2 = land.sq_residuals(pts).map_err(|e| e.to_string())?;
        Ok(r2.iter().sum::<f64>() / r2.len() as f64)
    };
    let s = 1e-3;
    let mut means = vec![mean(initial.points())?];
    for t in 1..=5 {
        let out = pacmann_move(&initial, &square, &land, &PacmannConfig::new(PointOptimizer::GradientAscent, s, t), 1)
            .map_err(|e| e.to_string())?;
        means.push(mean(out.points())?);
        // Every point stays inside, or is tagged as replaced where the
        // straight-line trajectory leaves the square.
        for i in 0..initial.len() {
            let mut x = initial.point(i).to_vec();
            let mut escaped = false;
            for _ in 0..t {
                let e = (-(x[0] * x[0] + x[1] * x[1])).exp();
                x = vec![x[0] - s * 2.0 * x[0] * e, x[1] - s * 2.0 * x[1] * e];
                escaped |= !square.contains(&x);
            }
            let p = out.point(i);
            ensure(square.contains(p), || format!("point {i} at {p:?} left the square"))?;
            let replaced = out.origins()[i] == Origin::Replaced;
            ensure(escaped == replaced, || format!("point {i}: escaped {escaped}, tagged {replaced}"))?;
            if !escaped {
                let dev = (p[0] - x[0]).abs().max((p[1] - x[1]).abs());
                ensure(dev < 1e-12, || format!("point {i} deviates from the ascent oracle by {dev:.1e}"))?;
            }
        }
    }
    ensure(means.windows(2).all(|w| w[1] > w[0]), || format!("mean r² not increasing: {means:?}"))?;
    for kind in PointOptimizer::ALL {
        for cfg in [PacmannConfig::new(kind, 0.0, 5), PacmannConfig::new(kind, 1e-3, 0)] {
            let out = pacmann_move(&initial, &square, &land, &cfg, 1).map_err(|e| e.to_string())?;
            ensure(out == initial, || format!("{kind} with s={}, T={} moved points", cfg.stepsize, cfg.steps))?;
        }
    }
    Ok(format!("mean r² {:.6} → {:.6} over 5 strictly increasing steps; s=0 and T=0 identities", means[0], means[5]))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Check {
    let n_pool = 100;
    let pool: Vec<f64> = (0..n_pool).map(|i| i as f64).collect();
    let residuals: Vec<f64> = (0..n_pool).map(|i| ((i * 37 % 100) as f64 / 10.0).powi(2) + 0.05).collect();
    let mean = residuals.iter().sum::<f64>() / n_pool as f64;
    let w: Vec<f64> = residuals.iter().map(|r| r / mean + 1.0).collect();
    let total: f64 = w.iter().sum();
    let mut counts = vec![0usize; n_pool];
    let draws = 10_000;
    for seed in 0..draws {
        let out = rad_resample(1, 1, &pool, &residuals, 1.0, 1.0, seed).map_err(|e| e.to_string())?;
        counts[out.point(0)[0] as usize] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&w)
        .map(|(&o, &wi)| {
            let e = wi / total * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let p = 1.0 - ChiSquared::new((n_pool - 1) as f64).unwrap().cdf(stat);
    ensure(p > 0.01, || format!("chi-square {stat:.1}, p = {p:.4}"))?;
    Ok(format!("{draws} draws, chi-square {stat:.1} on {} dof, p = {p:.3}", n_pool - 1))
}

// ---------------------------------------------------------------- criterion 7

fn radical_inverse_oracle(i: u64, base: u64) -> f64 {
    let mut digits = Vec::new();
    let mut k = i;
    while k > 0 {
        digits.push(k % base);
        k /= base;
    }
    digits.iter().enumerate().map(|(pos, &d)| d as f64 / (base as f64).powi(pos as i32 + 1)).sum()
}

fn criterion_7() -> Check {
    let unit = DomainBox::cube(2, 0.0, 1.0).map_err(|e| e.to_string())?;
    let four = hammersley(4, &unit);
    let want = [0.0, 0.0, 0.25, 0.5, 0.5, 0.25, 0.75, 0.75];
    ensure(four.points() == want, || format!("n=4 gives {:?}", four.points()))?;
    let mut checked = 0;
    for n in 1..=64 {
        for d in 1..=5 {
            let u = hammersley_unit(n, d);
            for i in 0..n {
                let row = &u[i * d..(i + 1) * d];
                ensure(row[0] == i as f64 / n as f64, || format!("n={n} i={i}: first coordinate {}", row[0]))?;
                for (j, base) in [2u64, 3, 5, 7].iter().enumerate().take(d - 1) {
                    let o = radical_inverse_oracle(i as u64, *base);
                    ensure((row[j + 1] - o).abs() < 1e-15, || {
                        format!("n={n} i={i} base {base}: {} vs {o}", row[j + 1])
                    })?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("n=4 exact; {checked} points up to n=64, d≤5 match the radical-inverse oracle"))
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Check {
    let mut rosen = |x: &[f64]| -> pinnbench::Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        Ok((f, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]))
    };
    let mut x = vec![-1.2, 1.0];
    let (f, infos) = minimize(&mut x, LbfgsConfig::default(), 200, &mut rosen).map_err(|e| e.to_string())?;
    ensure(f < 1e-6, || format!("Rosenbrock f = {f:.2e} after {} iterations", infos.len()))?;

    let mut quad = |x: &[f64]| -> pinnbench::Result<(f64, Vec<f64>)> {
        let ax = [3.0 * x[0] + x[1], x[0] + 2.0 * x[1]];
        Ok((0.5 * (x[0] * ax[0] + x[1] * ax[1]) - x[0] - x[1], vec![ax[0] - 1.0, ax[1] - 1.0]))
    };
    let mut y = vec![2.0, -3.0];
    let (_, qinfos) = minimize(&mut y, LbfgsConfig::default(), 10, &mut quad).map_err(|e| e.to_string())?;
    let g = quad(&y).unwrap().1;
    let gn = g[0].hypot(g[1]);
    ensure(gn < 1e-10, || format!("quadratic |g| = {gn:.2e} after {} iterations", qinfos.len()))?;
    Ok(format!(
        "Rosenbrock f = {f:.1e} in {} iterations; quadratic |g| = {gn:.1e} in {} iterations",
        infos.len(),
        qinfos.len()
    ))
}

// ---------------------------------------------------------- criteria 9 and 11

fn desk_burgers(sampler: SamplerKind, seeds: Vec<u64>, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(ProblemKind::Burgers, Preset::Desk, sampler, seeds);
    if sampler == SamplerKind::Pacmann {
        cfg.sampler.optimizer = Some(PointOptimizer::Adam);
        cfg.sampler.stepsize = Some(1e-5);
        cfg.sampler.steps = Some(15);
    }
    // Every configured seed is scored; none is replaced by a retry.
    cfg.eval.retries = 0;
    cfg.eval.log_every = 500;
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn l2_of(outcome: &ExperimentOutcome) -> Vec<(u64, RunStatus, f64)> {
    outcome.final_rows().iter().map(|r| (r.seed, r.status, r.l2)).collect()
}

fn fmt_runs(runs: &[(u64, RunStatus, f64)]) -> String {
    runs.iter()
        .map(|(s, st, l2)| {
            format!("seed {s} {:.2}%{}", 100.0 * l2, if *st == RunStatus::Ok { "" } else { " (failed)" })
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn mean(v: &[(u64, RunStatus, f64)]) -> f64 {
    v.iter().map(|r| r.2).sum::<f64>() / v.len() as f64
}

fn criterion_9(dir: &Path) -> Check {
    let pac = |seeds, sub: &str| run_experiment(&desk_burgers(SamplerKind::Pacmann, seeds, &dir.join(sub)), 1);
    let first = pac(vec![1], "pacmann-first").map_err(|e| e.to_string())?;
    let rest = pac(vec![2, 3], "pacmann-rest").map_err(|e| e.to_string())?;
    let grid = run_experiment(&desk_burgers(SamplerKind::UniformGrid, vec![1, 2, 3], &dir.join("grid")), 1)
        .map_err(|e| e.to_string())?;
    let mut p = l2_of(&first);
    p.extend(l2_of(&rest));
    let g = l2_of(&grid);
    let summary = format!(
        "PACMANN [{}] mean {:.2}%; uniform grid [{}] mean {:.2}%",
        fmt_runs(&p),
        100.0 * mean(&p),
        fmt_runs(&g),
        100.0 * mean(&g)
    );
    let every = p.iter().all(|r| r.1 == RunStatus::Ok && r.2 < 0.10);
    let ordered = g.iter().all(|r| r.1 == RunStatus::Ok) && mean(&p) <= mean(&g);
    ensure(every, || format!("not every PACMANN seed below 10%: {summary}"))?;
    ensure(ordered, || format!("PACMANN mean above the grid mean: {summary}"))?;
    Ok(summary)
}

fn strip_wall_time(path: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()).collect())
}

fn criterion_11(dir: &Path) -> Check {
    let original = dir.join("pacmann-first/results.csv");
    if !original.exists() {
        return Err("criterion 9 did not produce a first-seed results file".into());
    }
    let cfg = desk_burgers(SamplerKind::Pacmann, vec![1], &dir.join("pacmann-rerun"));
    run_experiment(&cfg, 1).map_err(|e| e.to_string())?;
    let rerun = dir.join("pacmann-rerun/results.csv");
    let (a, b) = (strip_wall_time(&original)?, strip_wall_time(&rerun)?);
    ensure(a == b, || format!("results differ:\n{}\n{}", a.join("\n"), b.join("\n")))?;
    let (_, rows) = read_results(&rerun).map_err(|e| e.to_string())?;
    let log_a = fs::read(dir.join("pacmann-first/logs/burgers-pacmann-seed1.csv")).map_err(|e| e.to_string())?;
    let log_b = fs::read(dir.join("pacmann-rerun/logs/burgers-pacmann-seed1.csv")).map_err(|e| e.to_string())?;
    ensure(log_a == log_b, || "training logs differ".into())?;
    Ok(format!(
        "seed 1 rerun: {} results line(s) and training log bitwise identical apart from wall_time_s",
        rows.len()
    ))
}

// --------------------------------------------------------------- criterion 10

fn criterion_10(dir: &Path) -> Check {
    let mut cfg =
        ExperimentConfig::preset(ProblemKind::NavierStokes, Preset::Desk, SamplerKind::Pacmann, vec![1, 2, 3]);
    cfg.net = Some(vec![50; 6]);
    cfg.counts.n_ref = Some(7000);
    cfg.eval.retries = 0;
    cfg.eval.log_every = 500;
    cfg.output_dir = dir.join("navier_stokes");
    let outcome = run_experiment(&cfg, 1).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for row in outcome.final_rows() {
        let (e1, e2) = (row.lambda1_relerr.unwrap_or(f64::NAN), row.lambda2_relerr.unwrap_or(f64::NAN));
        ok &= row.status == RunStatus::Ok && e1 < 0.05 && e2 < 0.20;
        parts.push(format!("seed {} λ1 err {:.2}%, λ2 err {:.2}%", row.seed, 100.0 * e1, 100.0 * e2));
    }
    let summary = parts.join("; ");
    ensure(ok, || format!("tolerance missed: {summary}"))?;
    Ok(summary)
}

// ------------------------------------------------------------------- driver

struct Criterion {
    id: usize,
    budget_s: f64,
    run: Box<dyn Fn(&Path) -> Check>,
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let list = std::env::args().skip(1).any(|a| a == "--list");
    let criteria = vec![
        Criterion { id: 1, budget_s: 30.0, run: Box::new(|_| criterion_1()) },
        Criterion { id: 2, budget_s: 10.0, run: Box::new(|_| criterion_2()) },
        Criterion { id: 3, budget_s: 5.0, run: Box::new(|_| criterion_3()) },
        Criterion { id: 4, budget_s: 1.0, run: Box::new(|_| criterion_4()) },
        Criterion { id: 5, budget_s: 10.0, run: Box::new(|_| criterion_5()) },
        Criterion { id: 6, budget_s: 5.0, run: Box::new(|_| criterion_6()) },
        Criterion { id: 7, budget_s: 1.0, run: Box::new(|_| criterion_7()) },
        Criterion { id: 8, budget_s: 5.0, run: Box::new(|_| criterion_8()) },
        Criterion { id: 9, budget_s: 1800.0, run: Box::new(criterion_9) },
        Criterion { id: 10, budget_s: 2700.0, run: Box::new(criterion_10) },
        Criterion { id: 11, budget_s: f64::INFINITY, run: Box::new(criterion_11) },
    ];
    if list {
        for c in &criteria {
            println!("criterion {}: test", c.id);
        }
        return;
    }
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut stdout = std::io::stdout().lock();
    let mut failed = Vec::new();
    let mut cpu_9 = 0.0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let (cpu0, wall0) = (cpu_seconds(), Instant::now());
        let result = (c.run)(dir.path());
        let cpu = cpu_seconds() - cpu0;
        let wall = wall0.elapsed().as_secs_f64();
        // Criterion 11 repeats one run of criterion 9 and shares its budget.
        let (budget, spent) = match c.id {
            9 => {
                cpu_9 = cpu;
                (c.budget_s, cpu)
            }
            11 if cpu_9 > 0.0 => (1800.0, cpu_9 + cpu),
            _ => (c.budget_s, cpu),
        };
        let timing = if c.id == 11 && cpu_9 > 0.0 {
            format!("cpu {cpu:.1}s, with criterion 9 {spent:.1}s / {budget:.0}s budget")
        } else {
            format!("cpu {cpu:.2}s / {budget:.0}s budget, wall {wall:.1}s")
        };
        let over = spent > budget;
        let (verdict, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over the runtime budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed.push(c.id);
        }
        writeln!(stdout, "criterion {:>2}: {verdict}  {detail}  [{timing}]", c.id).unwrap();
        stdout.flush().unwrap();
    }
    if !failed.is_empty() {
        writeln!(stdout, "failed criteria: {failed:?}").unwrap();
        // Verdicts are reported either way; only strict mode fails the test run on them.
        if std::env::var_os("PINNBENCH_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
