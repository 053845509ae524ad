//! Episode runner, seed sweeps, regret summaries, bound overlays and the
//! file interfaces (CSV, JSON traces).
//!
//! Episodes for distinct seeds run in parallel; each episode is
//! single-threaded, and aggregation is a deterministic reduction in seed
//! order regardless of completion order, so every output is byte-identical
//! for identical configurations and seeds.

mod config;
mod csv;
mod trace_io;

pub use config::{BoundOverlay, ExperimentConfig, SeedSpec};
pub use csv::{write_round_csv, write_summary_csv, write_sweep_csv, SummaryRow, SweepRow};
pub use trace_io::{trace_from_file, trace_to_file, TraceFile};

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::environments::{build_round_feedback, EnvError, Environment, RoundEvents};
use crate::learners::LearnerError;
use crate::metrics::{accuracy_summary, d_partials, lambda_partials, AccuracySummary};
use crate::oracle::{best_action_hindsight, OracleError};
use crate::rng::episode_rng;
use crate::types::{
    ActionDistribution, AdversaryCommitment, DomainError, EvolutionHorizon, LossVector, RngSeed,
    RunTrace,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("learner failed at round {round}: {source}")]
    LearnerFailure { round: usize, source: LearnerError },
    #[error("learner config: {0}")]
    LearnerConfig(LearnerError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code the CLI maps this error to: 2 for configuration
    /// problems, 3 for numeric failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Env(_)
            | HarnessError::LearnerConfig(_)
            | HarnessError::Domain(_)
            | HarnessError::Io(_)
            | HarnessError::Json(_) => 2,
            HarnessError::LearnerFailure { .. } | HarnessError::Oracle(_) => 3,
        }
    }
}

/// Everything shared across the episodes of one experiment: the adversary
/// commitment, its revelation schedule, and the hindsight comparator. The
/// commitment is environment-only, so it is computed once and shared
/// read-only across seeds.
pub struct ExperimentContext {
    pub config: ExperimentConfig,
    pub commitment: Arc<AdversaryCommitment>,
    pub events: Arc<RoundEvents>,
    pub d_max: EvolutionHorizon,
    pub comparator: usize,
    /// Non-fatal notes from learner construction (tuning admissibility).
    pub warnings: Vec<String>,
}

/// Validate a configuration and materialize the shared state.
pub fn prepare(config: ExperimentConfig) -> Result<ExperimentContext, HarnessError> {
    if config.seeds.is_empty() {
        return Err(HarnessError::Config("seeds must be nonempty".into()));
    }
    if let Some(t) = config.horizon {
        if t != config.environment.horizon {
            return Err(HarnessError::Config(format!(
                "top-level T = {t} disagrees with environment T = {}",
                config.environment.horizon
            )));
        }
    }
    let env = Environment::new(config.environment.clone())?;
    let commitment = Arc::new(env.materialize()?);
    let events = Arc::new(RoundEvents::from_commitment(&commitment));
    let d_max = commitment.declared_horizon();

    // Surface learner-config problems and tuning notes before any episode.
    let built = config
        .learner
        .build(commitment.k(), commitment.horizon(), d_max)
        .map_err(HarnessError::LearnerConfig)?;
    if config.strict_gamma && built.condition_ok == Some(false) {
        return Err(HarnessError::Config(format!(
            "strict gamma: {}",
            built.notes.join("; ")
        )));
    }

    let (comparator, _) = best_action_hindsight(&commitment.true_loss_vectors())?;
    Ok(ExperimentContext {
        config,
        commitment,
        events,
        d_max,
        comparator,
        warnings: built.notes,
    })
}

/// Run one episode: act, sample by inverse CDF from the episode's own
/// stream, report the action, deliver the round's feedback. Deterministic
/// per seed.
pub fn run_episode(ctx: &ExperimentContext, seed: RngSeed) -> Result<RunTrace, HarnessError> {
    let k = ctx.commitment.k();
    let horizon = ctx.commitment.horizon();
    let built = ctx
        .config
        .learner
        .build(k, horizon, ctx.d_max)
        .map_err(HarnessError::LearnerConfig)?;
    let mut learner = built.learner;
    let mut rng = episode_rng(seed);
    let mut actions: Vec<usize> = Vec::with_capacity(horizon);
    let mut probs: Vec<ActionDistribution> = Vec::with_capacity(horizon);
    let info = learner.info_model();

    for t in 1..=horizon {
        let dist = learner
            .act(t)
            .map_err(|source| HarnessError::LearnerFailure { round: t, source })?;
        let action = dist.sample_index(rng.random::<f64>());
        learner
            .played(t, action)
            .map_err(|source| HarnessError::LearnerFailure { round: t, source })?;
        actions.push(action);
        probs.push(dist);
        let feedback = build_round_feedback(&ctx.commitment, &ctx.events, t, info, &actions)?;
        learner
            .observe(t, &feedback)
            .map_err(|source| HarnessError::LearnerFailure { round: t, source })?;
    }

    Ok(RunTrace {
        commitment: ctx.commitment.clone(),
        actions,
        sampling_probs: probs,
    })
}

/// Run every configured seed in parallel, collecting traces in seed order.
pub fn run_episodes(ctx: &ExperimentContext) -> Result<Vec<RunTrace>, HarnessError> {
    ctx.config
        .seeds
        .seeds()
        .par_iter()
        .map(|&seed| run_episode(ctx, seed))
        .collect()
}

/// Realized cumulative regret, averaged over seeds, with per-round
/// standard errors. The comparator is the best fixed action on the true
/// losses, shared by every seed (the adversary is oblivious).
#[derive(Debug, Clone)]
pub struct RegretCurve {
    pub comparator: usize,
    /// Mean cumulative realized regret per round, index `t - 1`.
    pub mean: Vec<f64>,
    /// Standard error of that mean per round.
    pub stderr: Vec<f64>,
    pub seeds: usize,
}

impl RegretCurve {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().unwrap_or(&0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().unwrap_or(&0.0)
    }

    pub fn mean_at(&self, t: usize) -> f64 {
        self.mean[t - 1]
    }
}

/// Per-round cumulative realized regret of one trace against a fixed
/// comparator action.
pub fn cumulative_regret(trace: &RunTrace, comparator: usize) -> Vec<f64> {
    let c = &trace.commitment;
    let mut cum = 0.0;
    (1..=c.horizon())
        .map(|t| {
            let loss = c.true_loss(t);
            cum += loss[trace.actions[t - 1]] - loss[comparator];
            cum
        })
        .collect()
}

/// Average the traces' realized regret against the hindsight-best action of
/// `true_losses`. All traces must share the horizon.
pub fn regret_summary(
    traces: &[RunTrace],
    true_losses: &[LossVector],
) -> Result<RegretCurve, HarnessError> {
    if traces.is_empty() {
        return Err(HarnessError::Config("need at least one trace".into()));
    }
    let horizon = traces[0].horizon();
    if true_losses.len() != horizon {
        return Err(HarnessError::Config(format!(
            "true losses cover {} rounds, traces have {horizon}",
            true_losses.len()
        )));
    }
    let (comparator, _) = best_action_hindsight(true_losses)?;
    let mut sum = vec![0.0f64; horizon];
    let mut sumsq = vec![0.0f64; horizon];
    for trace in traces {
        if trace.horizon() != horizon {
            return Err(HarnessError::Config("traces disagree on horizon".into()));
        }
        for (i, cum) in cumulative_regret(trace, comparator).into_iter().enumerate() {
            sum[i] += cum;
            sumsq[i] += cum * cum;
        }
    }
    let n = traces.len() as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr: Vec<f64> = mean
        .iter()
        .zip(&sumsq)
        .map(|(&m, &sq)| {
            if traces.len() < 2 {
                0.0
            } else {
                let var = ((sq - n * m * m) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            }
        })
        .collect();
    Ok(RegretCurve {
        comparator,
        mean,
        stderr,
        seeds: traces.len(),
    })
}

/// Theoretical-bound values aligned to the regret curve's round axis.
///
/// `cor1` has exact constants: `sqrt(4 ln K (t/2 + 2 D_t))` with `D_t` the
/// cumulative inaccuracy. `cor2` hides constants, so the overlay is
/// shape-only: `c sqrt(K t + lambda_{<=t}) ln t` with a display constant
/// `c` (default 1).
pub fn bound_overlay(
    kind: BoundOverlay,
    k: usize,
    d_partials: &[f64],
    lambda_partials: &[f64],
    display_c: f64,
) -> Vec<f64> {
    let ln_k = (k.max(2) as f64).ln();
    match kind {
        BoundOverlay::Cor1 => d_partials
            .iter()
            .enumerate()
            .map(|(i, &d_t)| {
                let t = (i + 1) as f64;
                (4.0 * ln_k * (t / 2.0 + 2.0 * d_t)).sqrt()
            })
            .collect(),
        BoundOverlay::Cor2 => lambda_partials
            .iter()
            .enumerate()
            .map(|(i, &l_t)| {
                let t = (i + 1) as f64;
                display_c * (k as f64 * t + l_t).sqrt() * t.ln()
            })
            .collect(),
        BoundOverlay::None => vec![f64::NAN; d_partials.len()],
    }
}

/// An experiment's aggregate outputs.
pub struct ExperimentResult {
    pub curve: RegretCurve,
    pub accuracy: AccuracySummary,
    pub summary: SummaryRow,
    pub warnings: Vec<String>,
}

/// Summarize already-run traces (shared commitment assumed).
pub fn summarize(
    ctx: &ExperimentContext,
    traces: &[RunTrace],
) -> Result<ExperimentResult, HarnessError> {
    let curve = regret_summary(traces, &ctx.commitment.true_loss_vectors())?;
    let accuracy = accuracy_summary(&ctx.commitment);
    let horizon = ctx.commitment.horizon();
    let k = ctx.commitment.k();
    let dp = d_partials(&ctx.commitment);
    let lp = lambda_partials(&ctx.commitment);
    let cor1 = bound_overlay(BoundOverlay::Cor1, k, &dp, &lp, 1.0);
    let cor2 = bound_overlay(
        BoundOverlay::Cor2,
        k,
        &dp,
        &lp,
        ctx.config.bound_display_constant,
    );
    let summary = SummaryRow {
        horizon,
        mean_regret: curve.final_mean(),
        stderr: curve.final_stderr(),
        bound_cor1: *cor1.last().unwrap_or(&f64::NAN),
        bound_cor2_shape: *cor2.last().unwrap_or(&f64::NAN),
        d: accuracy.d,
        lambda: accuracy.lambda,
        lambda_sum: accuracy.lambda_sum,
        corruption: accuracy.corruption_budget,
    };
    Ok(ExperimentResult {
        curve,
        accuracy,
        summary,
        warnings: ctx.warnings.clone(),
    })
}

/// Prepare, run all seeds, and summarize.
pub fn run_experiment(config: ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let ctx = prepare(config)?;
    let traces = run_episodes(&ctx)?;
    summarize(&ctx, &traces)
}

/// Exact expected regret by full action-path enumeration, an alternative
/// to the Monte Carlo estimate for tiny instances (at most 4096 paths).
pub fn exact_expected_regret(ctx: &ExperimentContext) -> Result<f64, HarnessError> {
    let built = ctx
        .config
        .learner
        .build(ctx.commitment.k(), ctx.commitment.horizon(), ctx.d_max)
        .map_err(HarnessError::LearnerConfig)?;
    Ok(crate::oracle::exhaustive_regret_small(
        &ctx.commitment,
        &ctx.events,
        built.learner.as_ref(),
    )?)
}

/// Apply one `--vary` assignment to a copy of the base configuration.
/// Integer-valued parameters reject fractional values.
pub fn apply_vary(
    base: &ExperimentConfig,
    param: &str,
    value: f64,
) -> Result<ExperimentConfig, HarnessError> {
    use crate::environments::{CorruptionModel, DelaySchedule, FeedbackKind};
    let mut cfg = base.clone();
    let as_usize = |v: f64| -> Result<usize, HarnessError> {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(HarnessError::Config(format!(
                "parameter {param} needs a nonnegative integer, got {v}"
            )));
        }
        Ok(v as usize)
    };
    match param {
        "delay" => match &mut cfg.environment.kind {
            FeedbackKind::Delayed { delay } => {
                *delay = DelaySchedule::Constant(as_usize(value)?);
            }
            FeedbackKind::OptimisticDelayed { delay, .. } => {
                *delay = as_usize(value)?;
            }
            _ => {
                return Err(HarnessError::Config(
                    "delay only varies delayed or optimistic_delayed environments".into(),
                ))
            }
        },
        "hint_noise" => match &mut cfg.environment.kind {
            FeedbackKind::OptimisticDelayed { hint_noise, .. } => *hint_noise = value,
            _ => {
                return Err(HarnessError::Config(
                    "hint_noise only varies optimistic_delayed environments".into(),
                ))
            }
        },
        "epsilon0" | "rho" | "cutoff" => match &mut cfg.environment.kind {
            FeedbackKind::NoisyDecay {
                epsilon0,
                rho,
                cutoff,
            } => match param {
                "epsilon0" => *epsilon0 = value,
                "rho" => *rho = value,
                _ => *cutoff = as_usize(value)?,
            },
            _ => {
                return Err(HarnessError::Config(format!(
                    "{param} only varies noisy_decay environments"
                )))
            }
        },
        "corrupt_rounds" | "corrupt_delta" => match &mut cfg.environment.kind {
            FeedbackKind::Corrupted { corruption } => match (param, corruption) {
                ("corrupt_rounds", CorruptionModel::ReverseFirst { rounds }) => {
                    *rounds = as_usize(value)?;
                }
                ("corrupt_rounds", CorruptionModel::ShiftFirst { rounds, .. }) => {
                    *rounds = as_usize(value)?;
                }
                ("corrupt_delta", CorruptionModel::ShiftFirst { delta, .. }) => {
                    *delta = value;
                }
                _ => {
                    return Err(HarnessError::Config(format!(
                        "{param} does not apply to this corruption model"
                    )))
                }
            },
            _ => {
                return Err(HarnessError::Config(format!(
                    "{param} only varies corrupted environments"
                )))
            }
        },
        "eta" => cfg.learner.eta = Some(value),
        "gamma" => cfg.learner.gamma = Some(value),
        "skip_d_max" => {
            if cfg.learner.algo != crate::learners::LearnerAlgo::Skip {
                return Err(HarnessError::Config(
                    "skip_d_max only varies skip learners".into(),
                ));
            }
            cfg.learner.d_max = Some(as_usize(value)?);
        }
        other => {
            return Err(HarnessError::Config(format!(
                "unknown sweep parameter {other}"
            )))
        }
    }
    Ok(cfg)
}

/// Run the grid one point at a time; individual failures are recorded in
/// their row and the sweep continues. Row order follows the grid.
pub fn run_sweep(base: &ExperimentConfig, param: &str, values: &[f64]) -> Vec<SweepRow> {
    values
        .iter()
        .map(|&value| {
            let outcome = apply_vary(base, param, value).and_then(run_experiment);
            match outcome {
                Ok(result) => SweepRow {
                    param: param.to_string(),
                    value,
                    summary: Some(result.summary),
                    error: None,
                },
                Err(e) => SweepRow {
                    param: param.to_string(),
                    value,
                    summary: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
