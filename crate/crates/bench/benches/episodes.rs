use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use evolve_bench::{delayed_env, experiment};
use evolve_core::harness::{prepare, run_episode};
use evolve_core::learners::LearnerConfig;
use evolve_core::types::RngSeed;

fn bench_episodes(c: &mut Criterion) {
    let ewa_ctx = prepare(experiment(
        delayed_env(4, 2000, 25),
        LearnerConfig::ewa(0.02),
    ))
    .unwrap();
    c.bench_function("ewa_episode_t2000_d25", |b| {
        b.iter(|| run_episode(black_box(&ewa_ctx), RngSeed(3)).unwrap())
    });

    let ftrl_ctx = prepare(experiment(
        delayed_env(4, 500, 0),
        LearnerConfig::ftrl_auto(0.0),
    ))
    .unwrap();
    c.bench_function("ftrl_episode_t500_barrier", |b| {
        b.iter(|| run_episode(black_box(&ftrl_ctx), RngSeed(3)).unwrap())
    });

    let skip_ctx = prepare(experiment(
        delayed_env(4, 500, 0),
        LearnerConfig::skip(0, LearnerConfig::ftrl_auto(0.0)),
    ))
    .unwrap();
    c.bench_function("skip_ftrl_episode_t500", |b| {
        b.iter(|| run_episode(black_box(&skip_ctx), RngSeed(3)).unwrap())
    });
}

criterion_group!(benches, bench_episodes);
criterion_main!(benches);
