//! Shared fixtures for the criterion benchmarks.

use evolve_core::environments::{
    BaseLossSource, DelaySchedule, EnvironmentSpec, FeedbackKind,
};
use evolve_core::harness::{BoundOverlay, ExperimentConfig, SeedSpec};
use evolve_core::learners::LearnerConfig;

pub fn delayed_env(k: usize, horizon: usize, delay: usize) -> EnvironmentSpec {
    EnvironmentSpec {
        k,
        horizon,
        seed: 7,
        base: BaseLossSource::Gapped {
            means: (0..k).map(|i| 0.25 + 0.5 * i as f64 / k as f64).collect(),
            noise: 0.15,
        },
        kind: FeedbackKind::Delayed {
            delay: DelaySchedule::Constant(delay),
        },
    }
}

pub fn experiment(env: EnvironmentSpec, learner: LearnerConfig) -> ExperimentConfig {
    ExperimentConfig {
        environment: env,
        learner,
        seeds: SeedSpec::List(vec![1]),
        bound_overlay: BoundOverlay::None,
        strict_gamma: false,
        bound_display_constant: 1.0,
        horizon: None,
    }
}
