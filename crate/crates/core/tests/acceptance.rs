//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//! Criterion 11 regenerates the CSV output of criteria 1-9 and requires
//! byte identity, so every generator here is fully deterministic.

use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use evolve_core::environments::{
    BaseLossSource, CorruptionModel, DelaySchedule, Environment, EnvironmentSpec, FeedbackKind,
    PartialSchedule, RoundEvents,
};
use evolve_core::harness::{
    apply_vary, prepare, run_episode, run_episodes, summarize, write_summary_csv,
    write_sweep_csv, BoundOverlay, ExperimentConfig, SeedSpec, SweepRow,
};
use evolve_core::learners::{tuning, EvolvingEwa, Learner, LearnerConfig};
use evolve_core::metrics::inaccuracy_d;
use evolve_core::oracle::{
    best_action_hindsight, exhaustive_regret_small, grid_argmin_simplex, mc_unbiasedness,
};
use evolve_core::solver::{kkt_residual, solve_argmin, RegularizerParams};
use evolve_core::types::{
    validate_trace, ActionDistribution, EvolutionHorizon, LossVector, RngSeed, RunTrace,
};

struct Output {
    pass: bool,
    detail: String,
    csv: Vec<u8>,
}

static SLOTS: [OnceLock<Output>; 10] = [const { OnceLock::new() }; 10];

fn generate(n: usize) -> Output {
    match n {
        1 => criterion1(),
        2 => criterion2(),
        3 => criterion3(),
        4 => criterion4(),
        5 => criterion5(),
        6 => criterion6(),
        7 => criterion7(),
        8 => criterion8(),
        9 => criterion9(),
        _ => unreachable!(),
    }
}

fn cached(n: usize) -> &'static Output {
    SLOTS[n].get_or_init(|| generate(n))
}

fn report(n: usize, out: &Output) {
    println!(
        "criterion {n}: {} — {}",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail
    );
}

fn config(env: EnvironmentSpec, learner: LearnerConfig, seeds: u64) -> ExperimentConfig {
    ExperimentConfig {
        environment: env,
        learner,
        seeds: SeedSpec::Range { start: 0, count: seeds },
        bound_overlay: BoundOverlay::Cor1,
        strict_gamma: false,
        bound_display_constant: 1.0,
        horizon: None,
    }
}

/// Upper bound on the inaccuracy of a fixed-delay environment with losses
/// in [0, 1]: at round t, at most min(d, t-1) origins are unrevealed.
fn d_bar_fixed_delay(d: usize, horizon: usize) -> f64 {
    (1..=horizon).map(|t| d.min(t - 1) as f64).sum()
}

fn validate_all(traces: &[RunTrace], d_max: EvolutionHorizon) -> usize {
    traces
        .iter()
        .map(|trace| validate_trace(trace, d_max).len())
        .sum()
}

fn linreg_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// Criterion 1: on 500 random instances (K in {2,3,4}, eta in [1e-3, 1],
// barrier in [0, 1], losses in [0, 20]), the solver matches the grid
// oracle within 1e-6 per coordinate with a stationarity residual <= 1e-8,
// in under 60 seconds.
fn criterion1() -> Output {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut csv = Vec::new();
    csv.extend_from_slice(b"instance,k,eta,barrier,max_dev,kkt_residual\n");
    let mut worst_dev = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut pass = true;
    for i in 0..500 {
        let k = 2 + (rng.random::<u32>() % 3) as usize;
        let eta = 10f64.powf(rng.random::<f64>() * 3.0 - 3.0);
        let barrier = rng.random::<f64>();
        let l: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 20.0).collect();
        let params = RegularizerParams::new(eta, barrier).unwrap();
        let solved = solve_argmin(&l, &params).unwrap();
        let grid = grid_argmin_simplex(&l, &params, 100).unwrap();
        let dev = solved
            .probs()
            .iter()
            .zip(grid.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let kkt = kkt_residual(&solved, &l, &params).unwrap();
        worst_dev = worst_dev.max(dev);
        worst_kkt = worst_kkt.max(kkt);
        pass &= dev <= 1e-6 && kkt <= 1e-8;
        csv.extend_from_slice(
            format!("{i},{k},{eta},{barrier},{dev},{kkt}\n").as_bytes(),
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed <= 60.0;
    Output {
        pass,
        detail: format!(
            "500 instances: max coord deviation {worst_dev:.3e} (tol 1e-6), \
             max kkt residual {worst_kkt:.3e} (tol 1e-8), {elapsed:.1}s (cap 60s)"
        ),
        csv,
    }
}

// Criterion 2: with no barrier the solver equals the closed-form softmax
// within 1e-12 on 1000 random instances.
fn criterion2() -> Output {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut csv = Vec::new();
    csv.extend_from_slice(b"instance,k,eta,max_dev\n");
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..1000 {
        let k = 2 + (rng.random::<u32>() % 5) as usize;
        let eta = 10f64.powf(rng.random::<f64>() * 3.0 - 3.0);
        let l: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 20.0).collect();
        let params = RegularizerParams::entropy_only(eta).unwrap();
        let solved = solve_argmin(&l, &params).unwrap();
        // Plain closed form, no stabilization (exponents stay mild here).
        let weights: Vec<f64> = l.iter().map(|&li| (-eta * li).exp()).collect();
        let total: f64 = weights.iter().sum();
        let dev = solved
            .probs()
            .iter()
            .zip(&weights)
            .map(|(p, w)| (p - w / total).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(dev);
        pass &= dev <= 1e-12;
        csv.extend_from_slice(format!("{i},{k},{eta},{dev}\n").as_bytes());
    }
    Output {
        pass,
        detail: format!("1000 instances: max deviation from closed form {worst:.3e} (tol 1e-12)"),
        csv,
    }
}

// Criterion 3: the importance-weighted estimator passes the 3-sigma
// unbiasedness test with 1e5 samples on 50 random (feedback, p) pairs,
// including sampling probabilities as small as 0.01.
fn criterion3() -> Output {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let mut csv = Vec::new();
    csv.extend_from_slice(b"pair,k,min_prob,max_sigma_deviation\n");
    let mut worst = 0.0f64;
    let mut pass = true;
    for i in 0..50usize {
        let k = 2 + i % 3;
        let feedback =
            LossVector::new((0..k).map(|_| rng.random::<f64>()).collect()).unwrap();
        let probs = if i % 5 == 0 {
            // Pin one coordinate at the smallest allowed probability.
            let mut p = vec![(1.0 - 0.01) / (k - 1) as f64; k];
            p[0] = 0.01;
            p
        } else {
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>().max(0.02)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        };
        let p = ActionDistribution::new(probs).unwrap();
        let min_p = p.probs().iter().cloned().fold(1.0, f64::min);
        let r = mc_unbiasedness(&feedback, &p, 100_000, 0x5EED + i as u64).unwrap();
        let sigma = r.max_sigma_deviation();
        worst = worst.max(sigma);
        pass &= sigma <= 3.0;
        csv.extend_from_slice(format!("{i},{k},{min_p},{sigma}\n").as_bytes());
    }
    Output {
        pass,
        detail: format!("50 pairs x 1e5 samples: max deviation {worst:.2} sigma (tol 3)"),
        csv,
    }
}

// Criterion 4: delayed full-information cells (K in {2, 8}, T = 1e4,
// d in {0, 5, 25}, 200 seeds) with the exact-constant tuning stay below
// the exact regret bound plus 3 standard errors, within 5 minutes.
fn criterion4() -> Output {
    let start = Instant::now();
    let horizon = 10_000;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut details = Vec::new();
    let mut violations = 0usize;
    for &k in &[2usize, 8] {
        for &d in &[0usize, 5, 25] {
            let d_bar = d_bar_fixed_delay(d, horizon);
            let tune = tuning::tune_ewa(k, horizon, d_bar);
            let means: Vec<f64> = (0..k)
                .map(|i| 0.25 + 0.5 * i as f64 / (k - 1) as f64)
                .collect();
            let env = EnvironmentSpec {
                k,
                horizon,
                seed: 40 + d as u64,
                base: BaseLossSource::Gapped { means, noise: 0.15 },
                kind: FeedbackKind::Delayed {
                    delay: DelaySchedule::Constant(d),
                },
            };
            let ctx = prepare(config(env, LearnerConfig::ewa(tune.eta), 200)).unwrap();
            let traces = run_episodes(&ctx).unwrap();
            violations += validate_all(&traces, ctx.d_max);
            let result = summarize(&ctx, &traces).unwrap();
            let mean = result.curve.final_mean();
            let allowance = tune.regret_bound + 3.0 * result.curve.final_stderr();
            let ok = mean <= allowance;
            pass &= ok;
            details.push(format!(
                "K={k} d={d}: {mean:.0} <= {:.0}{}",
                tune.regret_bound,
                if ok { "" } else { " VIOLATED" }
            ));
            rows.push(result.summary);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed <= 300.0 && violations == 0;
    let mut csv = Vec::new();
    write_summary_csv(&mut csv, &rows).unwrap();
    Output {
        pass,
        detail: format!(
            "{} ({} trace violations, {elapsed:.0}s of 300s cap)",
            details.join("; "),
            violations
        ),
        csv,
    }
}

// Criterion 5: sweeping the delay over {4, 16, 64, 256} at T = 2e4 with
// per-delay tuning, the slope of log(final regret) against log(D) sits in
// the square-root band [0.3, 0.7]. 100 seeds per point.
fn criterion5() -> Output {
    let horizon = 20_000;
    let base_env = EnvironmentSpec {
        k: 2,
        horizon,
        seed: 51,
        base: BaseLossSource::Constant {
            values: vec![0.4, 0.6],
        },
        kind: FeedbackKind::Delayed {
            delay: DelaySchedule::Constant(0),
        },
    };
    let base_cfg = config(base_env, LearnerConfig::ewa(0.1), 100);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut violations = 0usize;
    for &d in &[4usize, 16, 64, 256] {
        let mut cfg = apply_vary(&base_cfg, "delay", d as f64).unwrap();
        cfg.learner =
            LearnerConfig::ewa(tuning::tune_ewa(2, horizon, d_bar_fixed_delay(d, horizon)).eta);
        let ctx = prepare(cfg).unwrap();
        let traces = run_episodes(&ctx).unwrap();
        violations += validate_all(&traces, ctx.d_max);
        let result = summarize(&ctx, &traces).unwrap();
        points.push((result.summary.d.ln(), result.curve.final_mean().ln()));
        rows.push(SweepRow {
            param: "delay".into(),
            value: d as f64,
            summary: Some(result.summary),
            error: None,
        });
    }
    let slope = linreg_slope(&points);
    let pass = (0.3..=0.7).contains(&slope) && violations == 0;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows).unwrap();
    Output {
        pass,
        detail: format!(
            "log-regret vs log-D slope {slope:.3} in [0.3, 0.7] ({violations} trace violations)"
        ),
        csv,
    }
}

// Criterion 6: bandit learner with second-order tuning (lambda_bar = 0,
// strict gamma off) on an accurate-feedback environment, K = 4, T = 1e4,
// 200 seeds: mean regret below the shape budget 5 sqrt(K T ln T) and
// sublinear (regret(T)/regret(T/2) < 1.8).
fn criterion6() -> Output {
    let k = 4;
    let horizon = 10_000;
    let env = EnvironmentSpec {
        k,
        horizon,
        seed: 3,
        base: BaseLossSource::Gapped {
            means: vec![0.3, 0.5, 0.6, 0.7],
            noise: 0.15,
        },
        kind: FeedbackKind::Delayed {
            delay: DelaySchedule::Constant(0),
        },
    };
    let ctx = prepare(config(env, LearnerConfig::ftrl_auto(0.0), 200)).unwrap();
    let warned = !ctx.warnings.is_empty();
    let traces = run_episodes(&ctx).unwrap();
    let violations = validate_all(&traces, ctx.d_max);
    let result = summarize(&ctx, &traces).unwrap();
    let mean = result.curve.final_mean();
    let budget = 5.0 * ((k * horizon) as f64 * (horizon as f64).ln()).sqrt();
    let half = result.curve.mean_at(horizon / 2);
    let ratio = mean / half;
    let pass = mean <= budget && ratio < 1.8 && violations == 0 && warned;
    let mut csv = Vec::new();
    write_summary_csv(&mut csv, std::slice::from_ref(&result.summary)).unwrap();
    Output {
        pass,
        detail: format!(
            "regret {mean:.0} <= {budget:.0} (shape-only), T/(T/2) ratio {ratio:.3} < 1.8, \
             gamma-condition warning escalated: {warned}, {violations} trace violations"
        ),
        csv,
    }
}

// Criterion 7: the skipping wrapper at d_max = 0 around the bandit learner
// on corrupted environments (budgets about 0, 50, 200): regret excess over
// the clean cell grows at most linearly with slope <= 2.5 per unit budget.
fn criterion7() -> Output {
    let horizon = 10_000;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut violations = 0usize;
    for &rounds in &[0usize, 167, 667] {
        let env = EnvironmentSpec {
            k: 2,
            horizon,
            seed: 5,
            base: BaseLossSource::Constant {
                values: vec![0.35, 0.65],
            },
            kind: FeedbackKind::Corrupted {
                corruption: CorruptionModel::ReverseFirst { rounds },
            },
        };
        let ctx = prepare(config(
            env,
            LearnerConfig::skip(0, LearnerConfig::ftrl_auto(0.0)),
            100,
        ))
        .unwrap();
        assert_eq!(ctx.d_max, EvolutionHorizon::Unbounded);
        let traces = run_episodes(&ctx).unwrap();
        violations += validate_all(&traces, ctx.d_max);
        let result = summarize(&ctx, &traces).unwrap();
        cells.push((result.summary.corruption, result.curve.final_mean()));
        rows.push(result.summary);
    }
    let clean = cells[0].1;
    let slope = cells[1..]
        .iter()
        .map(|(c, r)| (r - clean) * c)
        .sum::<f64>()
        / cells[1..].iter().map(|(c, _)| c * c).sum::<f64>();
    let pass = slope <= 2.5 && violations == 0;
    let mut csv = Vec::new();
    write_summary_csv(&mut csv, &rows).unwrap();
    Output {
        pass,
        detail: format!(
            "budgets {:.0}/{:.0}/{:.0}: excess-per-budget slope {slope:.3} <= 2.5 \
             ({violations} trace violations)",
            cells[0].0, cells[1].0, cells[2].0
        ),
        csv,
    }
}

// Criterion 8: composite feedback with d = 8 and negative partials; the
// prefix-sum invariant holds at construction for every round and partial,
// and the full-information learner stays within the exact-constant bound
// computed from the measured inaccuracy.
fn criterion8() -> Output {
    let k = 3;
    let horizon = 10_000;
    let d = 8usize;
    let env_spec = EnvironmentSpec {
        k,
        horizon,
        seed: 8,
        base: BaseLossSource::Gapped {
            means: vec![0.3, 0.5, 0.7],
            noise: 0.1,
        },
        kind: FeedbackKind::Composite {
            d,
            partials: PartialSchedule::Telescoping { amplitude: 0.3 },
        },
    };
    // Construction verifies the prefix invariant; re-verify from outside by
    // querying every (round, partial) prefix, and check that negative
    // partials genuinely occur.
    let env = Environment::new(env_spec.clone()).unwrap();
    let mut prefix_ok = true;
    let mut saw_negative_partial = false;
    for tau in 1..=horizon {
        let mut prev = vec![0.0; k];
        for s in 1..=d {
            let t = (tau + s - 1).min(horizon);
            let prefix = env.feedback_loss(t, tau).unwrap();
            for (i, &v) in prefix.values().iter().enumerate() {
                prefix_ok &= (0.0..=1.0).contains(&v);
                if v < prev[i] {
                    saw_negative_partial = true;
                }
            }
            prev = prefix.values().to_vec();
            if t == horizon {
                break;
            }
        }
    }

    let commitment = env.materialize().unwrap();
    let d_measured = inaccuracy_d(&commitment);
    let tune = tuning::tune_ewa(k, horizon, d_measured);
    let ctx = prepare(config(env_spec, LearnerConfig::ewa(tune.eta), 100)).unwrap();
    let traces = run_episodes(&ctx).unwrap();
    let violations = validate_all(&traces, ctx.d_max);
    let result = summarize(&ctx, &traces).unwrap();
    let mean = result.curve.final_mean();
    let pass =
        prefix_ok && saw_negative_partial && mean <= tune.regret_bound && violations == 0;
    let mut csv = Vec::new();
    write_summary_csv(&mut csv, std::slice::from_ref(&result.summary)).unwrap();
    Output {
        pass,
        detail: format!(
            "prefixes in range: {prefix_ok}, negative partials present: {saw_negative_partial}, \
             regret {mean:.0} <= bound {:.0} at measured D = {d_measured:.0} \
             ({violations} trace violations)",
            tune.regret_bound
        ),
        csv,
    }
}

// Criterion 9: for 20 random small configurations (K = 2, T <= 12), the
// Monte Carlo regret estimate over 1e5 seeds matches the exhaustive
// path-enumeration value within 4 standard errors.
fn criterion9() -> Output {
    let mut csv = Vec::new();
    csv.extend_from_slice(b"case,env,algo,horizon,exact,mc_mean,mc_stderr,sigma\n");
    let mut pass = true;
    let mut worst = 0.0f64;
    for case in 0..20usize {
        let horizon = 6 + (case * 5) % 7;
        let env = match case % 5 {
            0 => EnvironmentSpec {
                k: 2,
                horizon,
                seed: 900 + case as u64,
                base: BaseLossSource::Uniform,
                kind: FeedbackKind::Delayed {
                    delay: DelaySchedule::Constant(case % 3),
                },
            },
            1 => EnvironmentSpec {
                k: 2,
                horizon,
                seed: 900 + case as u64,
                base: BaseLossSource::Gapped {
                    means: vec![0.3, 0.7],
                    noise: 0.2,
                },
                kind: FeedbackKind::Corrupted {
                    corruption: CorruptionModel::ReverseFirst { rounds: horizon / 2 },
                },
            },
            2 => EnvironmentSpec {
                k: 2,
                horizon,
                seed: 900 + case as u64,
                base: BaseLossSource::Uniform,
                kind: FeedbackKind::OptimisticDelayed {
                    delay: 2,
                    hint_noise: 0.3,
                },
            },
            3 => EnvironmentSpec {
                k: 2,
                horizon,
                seed: 900 + case as u64,
                base: BaseLossSource::Uniform,
                kind: FeedbackKind::Composite {
                    d: 3,
                    partials: PartialSchedule::Telescoping { amplitude: 0.2 },
                },
            },
            _ => EnvironmentSpec {
                k: 2,
                horizon,
                seed: 900 + case as u64,
                base: BaseLossSource::Uniform,
                kind: FeedbackKind::NoisyDecay {
                    epsilon0: 0.3,
                    rho: 0.5,
                    cutoff: 2,
                },
            },
        };
        let (algo_name, learner) = match case % 4 {
            0 => ("ewa", LearnerConfig::ewa(0.1 + 0.3 * (case % 3) as f64)),
            1 => ("ewa", LearnerConfig::ewa(1.5)),
            2 => ("ftrl", LearnerConfig::ftrl(0.2, None)),
            _ => ("ftrl+barrier", LearnerConfig::ftrl(0.15, Some(0.8))),
        };
        let env_kind = match case % 5 {
            0 => "delayed",
            1 => "corrupted",
            2 => "optimistic",
            3 => "composite",
            _ => "noisy_decay",
        };

        let ctx = prepare(config(env.clone(), learner.clone(), 1)).unwrap();
        let events = RoundEvents::from_commitment(&ctx.commitment);
        let prototype = learner
            .build(2, horizon, ctx.d_max)
            .unwrap()
            .learner;
        let exact =
            exhaustive_regret_small(&ctx.commitment, &events, prototype.as_ref()).unwrap();

        // Monte Carlo over 1e5 seeds; per-episode regrets collected in seed
        // order so the reduction is deterministic.
        let n = 100_000u64;
        let comparator = ctx.comparator;
        let regrets: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|seed| {
                let trace = run_episode(&ctx, RngSeed(seed)).unwrap();
                let c = &trace.commitment;
                (1..=horizon)
                    .map(|t| {
                        let loss = c.true_loss(t);
                        loss[trace.actions[t - 1]] - loss[comparator]
                    })
                    .sum()
            })
            .collect();
        let nf = n as f64;
        let mean: f64 = regrets.iter().sum::<f64>() / nf;
        let var = regrets.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (nf - 1.0);
        let stderr = (var / nf).sqrt();
        let sigma = if stderr > 0.0 {
            (mean - exact).abs() / stderr
        } else if (mean - exact).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(sigma);
        pass &= sigma <= 4.0;
        csv.extend_from_slice(
            format!(
                "{case},{env_kind},{algo_name},{horizon},{exact},{mean},{stderr},{sigma}\n"
            )
            .as_bytes(),
        );
    }
    Output {
        pass,
        detail: format!("20 configs, 1e5 seeds each: max |MC - exact| = {worst:.2} sigma (tol 4)"),
        csv,
    }
}

#[test]
fn criterion_01_solver_matches_grid_oracle() {
    let out = cached(1);
    report(1, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_02_softmax_reduction() {
    let out = cached(2);
    report(2, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_03_estimator_unbiasedness() {
    let out = cached(3);
    report(3, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_04_exact_bound_inequality() {
    let out = cached(4);
    report(4, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_05_regret_scaling_in_inaccuracy() {
    let out = cached(5);
    report(5, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_06_bandit_sanity() {
    let out = cached(6);
    report(6, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_07_corrupted_reduction() {
    let out = cached(7);
    report(7, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_08_composite_reduction() {
    let out = cached(8);
    report(8, out);
    assert!(out.pass, "{}", out.detail);
}

#[test]
fn criterion_09_small_instance_equivalence() {
    let out = cached(9);
    report(9, out);
    assert!(out.pass, "{}", out.detail);
}

// Criterion 10: the trace validator reports zero violations across every
// acceptance run (asserted inside criteria 4-8 above, which validate every
// trace they generate), and the incremental cumulative estimate of the
// full-information learner equals the from-scratch sum bit for bit on a
// T = 1e3 spot check.
#[test]
fn criterion_10_trace_invariants() {
    let horizon = 1000;
    let env = Environment::new(EnvironmentSpec {
        k: 3,
        horizon,
        seed: 10,
        base: BaseLossSource::Uniform,
        kind: FeedbackKind::Delayed {
            delay: DelaySchedule::Constant(7),
        },
    })
    .unwrap();
    let commitment = env.materialize().unwrap();
    let events = RoundEvents::from_commitment(&commitment);
    let mut ewa = EvolvingEwa::new(3, 0.05).unwrap();
    let mut actions = Vec::new();
    let mut exact_rounds = 0usize;
    for t in 1..=horizon {
        ewa.act(t).unwrap();
        ewa.played(t, 0).unwrap();
        actions.push(0);
        let fb = evolve_core::environments::build_round_feedback(
            &commitment,
            &events,
            t,
            evolve_core::learners::InfoModel::FullInfo,
            &actions,
        )
        .unwrap();
        ewa.observe(t, &fb).unwrap();

        // From-scratch: fold the latest revisions in origin order.
        let mut scratch = vec![0.0f64; 3];
        for tau in 1..=t {
            for (s, &v) in scratch.iter_mut().zip(commitment.feedback(t, tau)) {
                *s += v;
            }
        }
        let incremental = ewa.cumulative_estimate();
        let bit_equal = incremental
            .iter()
            .zip(&scratch)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(bit_equal, "incremental/from-scratch mismatch at round {t}");
        exact_rounds += 1;
    }

    // A representative fresh run through the harness validates clean.
    let ctx = prepare(config(
        EnvironmentSpec {
            k: 2,
            horizon: 500,
            seed: 77,
            base: BaseLossSource::Uniform,
            kind: FeedbackKind::OptimisticDelayed {
                delay: 4,
                hint_noise: 0.2,
            },
        },
        LearnerConfig::ewa(0.1),
        8,
    ))
    .unwrap();
    let traces = run_episodes(&ctx).unwrap();
    let violations = validate_all(&traces, ctx.d_max);
    let pass = exact_rounds == horizon && violations == 0;
    println!(
        "criterion 10: {} — incremental estimate bit-exact on {exact_rounds}/{horizon} rounds; \
         {violations} validator violations (plus per-trace validation inside criteria 4-8)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

// Criterion 11: rerunning the generators of criteria 1-9 with the same
// seeds reproduces their CSV output byte for byte.
#[test]
fn criterion_11_determinism() {
    let mut all = true;
    let mut mismatched = Vec::new();
    for n in 1..=9usize {
        let first = cached(n);
        let second = generate(n);
        if first.csv != second.csv {
            all = false;
            mismatched.push(n.to_string());
        }
    }
    println!(
        "criterion 11: {} — criteria 1-9 regenerated byte-identically{}",
        if all { "PASS" } else { "FAIL" },
        if mismatched.is_empty() {
            String::new()
        } else {
            format!(" (mismatches: {})", mismatched.join(", "))
        }
    );
    assert!(all, "non-deterministic criteria: {}", mismatched.join(", "));
}

// The hindsight comparator itself is part of the acceptance surface: tie
// break by lowest index, exhaustive column-scan agreement.
#[test]
fn comparator_is_deterministic() {
    let losses: Vec<LossVector> = (0..7)
        .map(|_| LossVector::new(vec![0.5, 0.5]).unwrap())
        .collect();
    assert_eq!(best_action_hindsight(&losses).unwrap().0, 0);
}
