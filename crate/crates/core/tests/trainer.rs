mod common;

use common::fd_gradient;
use pinnbench::error::Error;
use pinnbench::evaluation::RunStatus;
use pinnbench::network::{Mlp, MlpConfig, ParameterVector};
use pinnbench::pacmann::{PacmannConfig, PointOptimizer};
use pinnbench::pde::{PdeProblem, PointCounts, ProblemKind};
use pinnbench::samplers::{hammersley, uniform_grid, BaselineKind, BaselineSamplerConfig};
use pinnbench::trainer::lbfgs::minimize;
use pinnbench::trainer::{
    compute_loss, field_loss, supervised_loss, Adam, LbfgsConfig, LossWeights, Phase, SamplerChoice, Supervised,
    TrainConfig, TrainSchedule, Trainer,
};
use proptest::prelude::*;
use rand::Rng;

// ---------------------------------------------------------------- Adam

#[test]
fn adam_three_steps_on_a_parabola_match_hand_oracle() {
    // f(θ) = θ², g = 2θ, lr = 0.1, from θ = 1.
    let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8, 0.1);
    let mut adam = Adam::new(1);
    let mut theta = [1.0];
    let mut oracle = 1.0f64;
    let (mut m, mut v) = (0.0f64, 0.0f64);
    for t in 1..=3 {
        let g = 2.0 * oracle;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1.powi(t));
        let v_hat = v / (1.0 - b2.powi(t));
        oracle -= lr * m_hat / (v_hat.sqrt() + eps);

        let grad = [2.0 * theta[0]];
        adam.step(&mut theta, &grad, lr);
        assert!((theta[0] - oracle).abs() < 1e-12, "step {t}: {} vs {oracle}", theta[0]);
    }
    assert_eq!(adam.steps(), 3);
}

#[test]
fn adam_first_step_is_lr_times_sign() {
    let grads = [3.0, -1e-3, 250.0, -0.5];
    let mut theta = [0.0; 4];
    Adam::new(4).step(&mut theta, &grads, 1e-3);
    for (t, g) in theta.iter().zip(grads) {
        assert!((t + 1e-3 * g.signum()).abs() < 1e-3 * 1e-4, "{t} for g={g}");
    }
}

#[test]
fn adam_zero_gradient_leaves_parameters_unchanged() {
    let mut theta = [0.3, -1.7, 2.0];
    let before = theta;
    let mut adam = Adam::new(3);
    for _ in 0..5 {
        adam.step(&mut theta, &[0.0; 3], 1e-3);
    }
    assert_eq!(theta, before);
}

// ---------------------------------------------------------------- L-BFGS

#[test]
fn lbfgs_solves_a_two_variable_quadratic_in_ten_iterations() {
    // f = ½xᵀAx − bᵀx with A = [[3,1],[1,2]], b = (1,1); minimizer A⁻¹b = (1/5, 2/5).
    let mut obj = |x: &[f64]| -> pinnbench::error::Result<(f64, Vec<f64>)> {
        let ax = [3.0 * x[0] + x[1], x[0] + 2.0 * x[1]];
        let f = 0.5 * (x[0] * ax[0] + x[1] * ax[1]) - x[0] - x[1];
        Ok((f, vec![ax[0] - 1.0, ax[1] - 1.0]))
    };
    let mut x = vec![-3.0, 4.0];
    let (_, infos) = minimize(&mut x, LbfgsConfig::default(), 10, &mut obj).unwrap();
    let g = obj(&x).unwrap().1;
    assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10, "{g:?} after {} iterations", infos.len());
    assert!((x[0] - 0.2).abs() < 1e-10 && (x[1] - 0.4).abs() < 1e-10);
}

#[test]
fn lbfgs_minimizes_rosenbrock_within_200_iterations() {
    let mut obj = |x: &[f64]| -> pinnbench::error::Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    };
    let mut x = vec![-1.2, 1.0];
    let (f, infos) = minimize(&mut x, LbfgsConfig::default(), 200, &mut obj).unwrap();
    assert!(f < 1e-6, "f = {f} after {} iterations", infos.len());
    assert!((x[0] - 1.0).abs() < 1e-2 && (x[1] - 1.0).abs() < 1e-2);
}

#[test]
fn lbfgs_history_never_exceeds_its_bound() {
    use pinnbench::trainer::Lbfgs;
    let diag: Vec<f64> = (1..=12).map(|i| i as f64).collect();
    let mut obj = |x: &[f64]| -> pinnbench::error::Result<(f64, Vec<f64>)> {
        let f = x.iter().zip(&diag).map(|(x, d)| 0.5 * d * x * x + x.powi(4)).sum();
        Ok((f, x.iter().zip(&diag).map(|(x, d)| d * x + 4.0 * x.powi(3)).collect()))
    };
    let cfg = LbfgsConfig { history: 3, ..LbfgsConfig::default() };
    let mut solver = Lbfgs::new(cfg);
    let mut x = vec![0.7; 12];
    let (mut f, mut g) = obj(&x).unwrap();
    for _ in 0..25 {
        solver.step(&mut x, &mut f, &mut g, &mut obj).unwrap();
        assert!(solver.history_len() <= 3);
    }
    solver.clear();
    assert_eq!(solver.history_len(), 0);
}

// ---------------------------------------------------------------- loss

fn zero_theta(problem: &PdeProblem, hidden: &[usize]) -> (Mlp, ParameterVector) {
    let cfg = problem.net_config(hidden);
    let n = cfg.param_count();
    let theta = ParameterVector::new(vec![0.0; n], 0).unwrap().with_inverse(&vec![0.0; problem.inverse.len()]);
    (Mlp::new(cfg).unwrap(), theta)
}

fn tiny_config(problem: &PdeProblem, sampler: SamplerChoice, schedule: TrainSchedule) -> TrainConfig {
    let mut cfg = TrainConfig::for_problem(problem, schedule, sampler);
    cfg.hidden = vec![8, 8];
    let c = problem.counts;
    cfg.counts = PointCounts {
        n_r: 64,
        n_bc: 16,
        n_ic: if c.n_ic > 0 { 16 } else { 0 },
        n_ref: if c.n_ref > 0 { 32 } else { 0 },
    };
    cfg.log_every = 7;
    cfg
}

fn tiny_schedule() -> TrainSchedule {
    TrainSchedule { blocks: 2, adam_iters: 23, lbfgs_iters: 6, adam_lr: 1e-3, period: 5 }
}

fn pacmann() -> SamplerChoice {
    let mut p = PacmannConfig::new(PointOptimizer::Adam, 1e-2, 3);
    p.period = 5;
    SamplerChoice::Pacmann(p)
}

fn baseline(kind: BaselineKind) -> SamplerChoice {
    let mut b = BaselineSamplerConfig::new(kind);
    b.period = 5;
    SamplerChoice::Baseline(b)
}

#[test]
fn exact_poisson_solution_has_negligible_loss() {
    let problem = PdeProblem::registry(ProblemKind::Poisson).unwrap();
    let trainer = Trainer::new(&problem, tiny_config(&problem, pacmann(), tiny_schedule()), 4).unwrap();
    let field = problem.exact_field().unwrap();
    let collocation = hammersley(750, &problem.domain);
    let loss =
        field_loss(&problem, &field, &[], &[], collocation.points(), trainer.data(), &LossWeights::default()).unwrap();
    assert!(loss.total < 1e-10, "{loss:?}");
    assert!(loss.ic.is_none() && loss.reference.is_none());
}

#[test]
fn zero_network_on_allen_cahn_has_unit_boundary_loss() {
    let problem = PdeProblem::registry(ProblemKind::AllenCahn).unwrap();
    let trainer = Trainer::new(&problem, tiny_config(&problem, pacmann(), tiny_schedule()), 4).unwrap();
    let (mlp, theta) = zero_theta(&problem, &[8, 8]);
    let colloc = hammersley(64, &problem.domain);
    let e =
        compute_loss(&problem, &mlp, &theta, colloc.points(), trainer.data(), &LossWeights::default(), false).unwrap();
    assert!((e.breakdown.bc - 1.0).abs() < 1e-15, "{:?}", e.breakdown);
}

#[test]
fn doubling_residual_weight_doubles_only_the_residual_term() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let trainer = Trainer::new(&problem, tiny_config(&problem, pacmann(), tiny_schedule()), 9).unwrap();
    let state = trainer.state();
    let colloc = state.collocation.points();
    let w1 = LossWeights::default();
    let w2 = LossWeights { lambda_r: 2.0, ..w1 };
    let a = compute_loss(&problem, trainer.mlp(), &state.theta, colloc, trainer.data(), &w1, false).unwrap().breakdown;
    let b = compute_loss(&problem, trainer.mlp(), &state.theta, colloc, trainer.data(), &w2, false).unwrap().breakdown;
    assert!((b.r - 2.0 * a.r).abs() <= 1e-15 * a.r);
    assert_eq!((a.bc, a.ic, a.reference), (b.bc, b.ic, b.reference));
    assert!((b.total - a.total - a.r).abs() < 1e-14);
}

#[test]
fn batched_loss_matches_pointwise_field_loss_on_every_problem() {
    for kind in ProblemKind::ALL {
        let problem = PdeProblem::registry(kind).unwrap();
        let trainer = Trainer::new(&problem, tiny_config(&problem, pacmann(), tiny_schedule()), 2).unwrap();
        let state = trainer.state();
        let mut theta = state.theta.clone();
        for (i, v) in theta.as_mut_slice().iter_mut().rev().take(problem.inverse.len()).enumerate() {
            *v = 0.3 + 0.1 * i as f64;
        }
        let colloc = state.collocation.points();
        let w = LossWeights { lambda_r: 1.5, lambda_ic: 0.7, lambda_bc: 2.0, lambda_ref: 0.9 };
        let batched =
            compute_loss(&problem, trainer.mlp(), &theta, colloc, trainer.data(), &w, false).unwrap().breakdown;
        let pointwise =
            field_loss(&problem, trainer.mlp(), theta.network(), theta.inverse(), colloc, trainer.data(), &w).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1e-3);
        assert!(close(batched.total, pointwise.total), "{kind}: {batched:?} vs {pointwise:?}");
        assert!(close(batched.r, pointwise.r) && close(batched.bc, pointwise.bc));
        assert_eq!(batched.ic.is_some(), pointwise.ic.is_some());
        assert_eq!(batched.reference.is_some(), pointwise.reference.is_some());
    }
}

#[test]
fn loss_gradient_matches_finite_differences_including_inverse_scalars() {
    let problem = PdeProblem::registry(ProblemKind::NavierStokes).unwrap();
    let trainer = Trainer::new(&problem, tiny_config(&problem, pacmann(), tiny_schedule()), 5).unwrap();
    let state = trainer.state();
    let colloc = &state.collocation.points()[..3 * 16];
    let w = LossWeights::default();
    let n_inv = state.theta.n_inverse();
    let mut theta = state.theta.clone();
    let len = theta.len();
    theta.as_mut_slice()[len - 2] = 0.8;
    theta.as_mut_slice()[len - 1] = 0.02;
    let eval = |x: &[f64]| {
        let t = ParameterVector::new(x.to_vec(), n_inv).unwrap();
        compute_loss(&problem, trainer.mlp(), &t, colloc, trainer.data(), &w, false).unwrap().breakdown.total
    };
    let analytic = compute_loss(&problem, trainer.mlp(), &theta, colloc, trainer.data(), &w, true).unwrap().grad;
    let fd = fd_gradient(eval, theta.as_slice());
    let mut rng = common::rng(3);
    let mut picks: Vec<usize> = (0..25).map(|_| rng.random_range(0..len)).collect();
    picks.extend([len - 2, len - 1]);
    for i in picks {
        let err = (analytic[i] - fd[i]).abs() / analytic[i].abs().max(1e-3);
        assert!(err < 1e-5, "component {i}: {} vs {}", analytic[i], fd[i]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn convex_fit_loss_decreases_over_every_500_iteration_window(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        c in -1.0f64..1.0,
        seed in 0u64..1000,
    ) {
        // A network without hidden layers is linear, so the ref term alone is convex.
        let cfg = MlpConfig::new(2, 1, vec![]);
        let mlp = Mlp::new(cfg.clone()).unwrap();
        let mut rng = common::rng(seed);
        let points: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let targets = points.chunks_exact(2).map(|p| a * p[0] + b * p[1] + c).collect();
        let data = Supervised { points, targets };
        let mut theta = ParameterVector::glorot(&cfg, seed);
        let mut adam = Adam::new(theta.len());
        let mut grad = vec![0.0; theta.len()];
        let mut window_start = f64::INFINITY;
        for it in 0..=2000 {
            grad.fill(0.0);
            let loss = supervised_loss(&mlp, theta.as_slice(), &data, 1.0, &mut grad, true).unwrap();
            if it % 500 == 0 {
                prop_assert!(loss < window_start || loss < 1e-20, "iteration {}: {} ≥ {}", it, loss, window_start);
                window_start = loss;
            }
            adam.step(theta.as_mut_slice(), &grad, 1e-3);
        }
    }
}

// ---------------------------------------------------------------- schedule

#[test]
fn events_per_block_is_adam_length_over_period() {
    assert_eq!(TrainSchedule::paper().events_per_block(), 140);
    assert_eq!(TrainSchedule::desk().events_per_block(), 40);
    assert_eq!(TrainSchedule::desk().total_iterations(), 5000);
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    let out = Trainer::new(&problem, cfg, 1).unwrap().run().unwrap();
    assert_eq!(out.status, RunStatus::Ok);
    assert_eq!(out.state.events, 2 * (23 / 5));
}

#[test]
fn resampling_never_touches_theta() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    for sampler in
        [pacmann(), baseline(BaselineKind::Rad), baseline(BaselineKind::RarD), baseline(BaselineKind::RandomResample)]
    {
        let mut tr = Trainer::new(&problem, tiny_config(&problem, sampler, tiny_schedule()), 3).unwrap();
        for _ in 0..5 {
            tr.adam_iteration().unwrap();
        }
        let theta = tr.state().theta.clone();
        let adam = tr.state().adam.clone();
        let before = tr.state().collocation.clone();
        tr.resample().unwrap();
        let bits = |t: &ParameterVector| t.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&tr.state().theta), bits(&theta));
        assert_eq!(tr.state().adam, adam);
        assert_ne!(tr.state().collocation, before);
    }
}

#[test]
fn static_samplers_keep_their_layout_for_the_whole_run() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    for (kind, layout) in [
        (BaselineKind::UniformGrid, uniform_grid(64, &problem.domain)),
        (BaselineKind::Hammersley, hammersley(64, &problem.domain)),
    ] {
        let mut cfg = tiny_config(&problem, baseline(kind), tiny_schedule());
        cfg.snapshot_every = 1;
        let out = Trainer::new(&problem, cfg, 6).unwrap().run().unwrap();
        assert_eq!(out.state.collocation, layout);
        assert_eq!(out.snapshots.len(), 8);
        assert!(out.snapshots.iter().all(|s| s.set == layout));
    }
}

#[test]
fn snapshots_start_from_the_hammersley_layout() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let mut cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    cfg.snapshot_every = 1;
    let out = Trainer::new(&problem, cfg, 6).unwrap().run().unwrap();
    assert_eq!(out.snapshots.len(), out.state.events);
    assert_eq!(out.snapshots[0].set, hammersley(64, &problem.domain));
    assert_eq!(out.snapshots[0].iteration, 5);
    assert!(out.snapshots.iter().all(|s| s.set.validate(&problem.domain).is_ok()));
    assert_ne!(out.snapshots.last().unwrap().set, out.snapshots[0].set);
}

#[test]
fn lbfgs_phase_rejects_resampling_and_adam_steps() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let mut tr = Trainer::new(&problem, tiny_config(&problem, pacmann(), tiny_schedule()), 3).unwrap();
    tr.set_phase(Phase::Lbfgs);
    assert!(matches!(tr.resample(), Err(Error::Config(_))));
    assert!(matches!(tr.adam_iteration(), Err(Error::Config(_))));
    let e = tr.loss(true).unwrap();
    let (mut f, mut g) = (e.breakdown.total, e.grad);
    tr.lbfgs_iteration(&mut f, &mut g).unwrap();
    assert!(tr.state().lbfgs.history_len() <= 1);
    tr.set_phase(Phase::Adam);
    assert_eq!(tr.state().lbfgs.history_len(), 0);
    let mut f2 = f;
    assert!(matches!(tr.lbfgs_iteration(&mut f2, &mut g), Err(Error::Config(_))));
}

#[test]
fn log_rows_cover_start_cadence_and_phase_ends() {
    let problem = PdeProblem::registry(ProblemKind::NavierStokes).unwrap();
    let cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    let out = Trainer::new(&problem, cfg, 8).unwrap().run().unwrap();
    let its: Vec<(usize, Phase)> = out.log.iter().map(|r| (r.iteration, r.phase)).collect();
    assert_eq!(its[0], (0, Phase::Adam));
    // Phase ends: 23 and 29 in block one, 52 and 58 in block two.
    for end in [(23, Phase::Adam), (29, Phase::Lbfgs), (52, Phase::Adam), (58, Phase::Lbfgs)] {
        assert!(its.contains(&end), "missing {end:?} in {its:?}");
    }
    for it in (7..=58).step_by(7) {
        assert!(its.iter().any(|(i, _)| *i == it), "missing row at {it}");
    }
    assert!(out.log.iter().all(|r| r.lambdas.len() == 2));
    assert_eq!(out.log.last().unwrap().iteration, 58);
    assert_eq!(out.report.inverse.len(), 2);
}

#[test]
fn identical_seed_gives_identical_run() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let run = |seed| {
        let cfg = tiny_config(&problem, pacmann(), tiny_schedule());
        Trainer::new(&problem, cfg, seed).unwrap().run().unwrap()
    };
    let (a, b, c) = (run(11), run(11), run(12));
    assert_eq!(a.state.theta, b.state.theta);
    assert_eq!(a.log, b.log);
    assert_eq!(a.state.collocation, b.state.collocation);
    assert_eq!(a.report.l2.to_bits(), b.report.l2.to_bits());
    assert_ne!(a.state.theta, c.state.theta);
}

#[test]
fn overflowing_loss_marks_the_run_diverged() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let mut cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    cfg.weights = LossWeights { lambda_r: f64::MAX, lambda_ic: f64::MAX, lambda_bc: f64::MAX, lambda_ref: 1.0 };
    let out = Trainer::new(&problem, cfg, 1).unwrap().run().unwrap();
    assert_eq!(out.status, RunStatus::Diverged);
    assert!(out.divergence.is_some());
    assert!(out.report.l2.is_nan());
}

#[test]
fn inconsistent_configurations_are_rejected() {
    let problem = PdeProblem::registry(ProblemKind::Burgers).unwrap();
    let mut cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    cfg.schedule.period = 10;
    assert!(matches!(Trainer::new(&problem, cfg, 1), Err(Error::Config(_))));
    let mut cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    cfg.counts.n_ic = 0;
    assert!(matches!(Trainer::new(&problem, cfg, 1), Err(Error::Config(_))));
    let mut cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    cfg.counts.n_ref = 5;
    assert!(matches!(Trainer::new(&problem, cfg, 1), Err(Error::Config(_))));
    let mut cfg = tiny_config(&problem, pacmann(), tiny_schedule());
    cfg.weights.lambda_bc = 0.0;
    assert!(matches!(Trainer::new(&problem, cfg, 1), Err(Error::Config(_))));
}
