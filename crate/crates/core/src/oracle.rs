//! Brute-force references, shipped in the library so any configuration can
//! be spot-checked from the CLI. Each oracle is an independent route to a
//! value the main implementation computes differently: a dense grid search
//! against the solver, an exhaustive column scan for the hindsight
//! comparator, Monte Carlo averaging against the importance-weighted
//! estimator, and full action-path enumeration against the sampled regret
//! estimate.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::environments::{build_round_feedback, RoundEvents};
use crate::learners::{Learner, LearnerError};
use crate::rng::oracle_rng;
use crate::solver::{objective, RegularizerParams, SolverError};
use crate::types::{ActionDistribution, AdversaryCommitment, DomainError, LossVector};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid search supports at most {max} actions, got {got}")]
    TooManyActions { max: usize, got: usize },
    #[error("grid resolution must be at least {min}, got {got}")]
    ResolutionTooLow { min: usize, got: usize },
    #[error("instance too large: {paths} action paths exceed the cap {cap}")]
    InstanceTooLarge { paths: u128, cap: u128 },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// A value produced by an oracle, with enough metadata to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub value: serde_json::Value,
    pub method: String,
    pub resolution: u64,
}

const GRID_MAX_ACTIONS: usize = 4;
const GRID_MIN_RESOLUTION: usize = 100;
const EXHAUSTIVE_PATH_CAP: u128 = 4096;
const MC_MIN_SAMPLES: usize = 10_000;

/// Dense reference for the simplex argmin: evaluate the objective on an
/// interior barycentric grid (`p_i = (c_i + 1) / (resolution + K)`, so every
/// coordinate is at least `1/(2 resolution)` for `K <= resolution`), then
/// refine the grid minimizer with 200 sweeps of exact pairwise line
/// searches. Agreement contract with the solver: 1e-6 per coordinate.
pub fn grid_argmin_simplex(
    l: &[f64],
    params: &RegularizerParams,
    resolution: usize,
) -> Result<ActionDistribution, OracleError> {
    let k = l.len();
    if k > GRID_MAX_ACTIONS {
        return Err(OracleError::TooManyActions {
            max: GRID_MAX_ACTIONS,
            got: k,
        });
    }
    if resolution < GRID_MIN_RESOLUTION {
        return Err(OracleError::ResolutionTooLow {
            min: GRID_MIN_RESOLUTION,
            got: resolution,
        });
    }
    if k == 0 {
        return Err(OracleError::Domain(DomainError::Empty));
    }
    if k == 1 {
        return Ok(ActionDistribution::new(vec![1.0])?);
    }

    let denom = (resolution + k) as f64;
    let mut best = vec![1.0 / k as f64; k];
    let mut best_value = f64::INFINITY;
    let mut counts = vec![0usize; k];
    enumerate_compositions(resolution, k, &mut counts, 0, &mut |c| {
        let p: Vec<f64> = c.iter().map(|&ci| (ci + 1) as f64 / denom).collect();
        let v = objective(&p, l, params);
        if v < best_value {
            best_value = v;
            best = p;
        }
    });

    refine_pairwise(&mut best, l, params, 200);
    Ok(ActionDistribution::new(best)?)
}

fn enumerate_compositions(
    remaining: usize,
    k: usize,
    counts: &mut Vec<usize>,
    index: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if index == k - 1 {
        counts[index] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[index] = c;
        enumerate_compositions(remaining - c, k, counts, index + 1, visit);
    }
}

/// Exact line search between coordinate pairs: moving mass `delta` from `j`
/// to `i` changes the directional derivative monotonically, so its root is
/// found by bisection; 200 sweeps over all pairs converge far below the
/// agreement tolerance.
fn refine_pairwise(p: &mut [f64], l: &[f64], params: &RegularizerParams, sweeps: usize) {
    let k = p.len();
    let grad = |pi: f64, li: f64| {
        li + (pi.ln() + 1.0) / params.eta - params.barrier / pi
    };
    let floor = 1e-300;
    for _ in 0..sweeps {
        let mut moved = 0.0f64;
        for i in 0..k {
            for j in (i + 1)..k {
                // Directional derivative of delta -> F(.., p_i + delta, ..,
                // p_j - delta, ..) is g_i(p_i + delta) - g_j(p_j - delta),
                // strictly increasing in delta.
                let mut lo = -(p[i] - floor);
                let mut hi = p[j] - floor;
                let d0 = grad(p[i], l[i]) - grad(p[j], l[j]);
                if d0.abs() < 1e-16 {
                    continue;
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let d = grad(p[i] + mid, l[i]) - grad(p[j] - mid, l[j]);
                    if d > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-16 * (1.0 + p[i].abs() + p[j].abs()) {
                        break;
                    }
                }
                let delta = 0.5 * (lo + hi);
                p[i] += delta;
                p[j] -= delta;
                moved = moved.max(delta.abs());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
}

/// Best fixed action in hindsight: the argmin over actions of the summed
/// true loss, ties broken by the lowest index.
pub fn best_action_hindsight(true_losses: &[LossVector]) -> Result<(usize, f64), OracleError> {
    let Some(first) = true_losses.first() else {
        return Err(OracleError::Domain(DomainError::Empty));
    };
    let k = first.len();
    let mut totals = vec![0.0f64; k];
    for loss in true_losses {
        if loss.len() != k {
            return Err(OracleError::Domain(DomainError::LengthMismatch {
                expected: k,
                got: loss.len(),
            }));
        }
        for (tot, &v) in totals.iter_mut().zip(loss.values()) {
            *tot += v;
        }
    }
    let mut best = 0usize;
    for (i, &v) in totals.iter().enumerate() {
        if v < totals[best] {
            best = i;
        }
    }
    Ok((best, totals[best]))
}

#[derive(Debug, Clone, Serialize)]
pub struct McUnbiasedness {
    pub mean: Vec<f64>,
    /// Standard error of each coordinate's sample mean.
    pub stderr: Vec<f64>,
    /// Per-coordinate deviation from the feedback vector in units of the
    /// standard error (zero-variance coordinates must match exactly).
    pub sigma_deviation: Vec<f64>,
    pub samples: usize,
}

impl McUnbiasedness {
    pub fn max_sigma_deviation(&self) -> f64 {
        self.sigma_deviation.iter().cloned().fold(0.0, f64::max)
    }
}

/// Monte Carlo check of the importance-weighted estimator: draw actions
/// from `p`, build the one-hot estimates `feedback[a]/p[a]`, and report how
/// far the per-coordinate empirical mean sits from the feedback vector.
pub fn mc_unbiasedness(
    feedback: &LossVector,
    p: &ActionDistribution,
    n_samples: usize,
    seed: u64,
) -> Result<McUnbiasedness, OracleError> {
    if n_samples < MC_MIN_SAMPLES {
        return Err(OracleError::TooFewSamples {
            min: MC_MIN_SAMPLES,
            got: n_samples,
        });
    }
    if feedback.len() != p.len() {
        return Err(OracleError::Domain(DomainError::LengthMismatch {
            expected: p.len(),
            got: feedback.len(),
        }));
    }
    let k = p.len();
    let mut rng = oracle_rng(seed);
    let mut sum = vec![0.0f64; k];
    let mut sum_sq = vec![0.0f64; k];
    for _ in 0..n_samples {
        let a = p.sample_index(rng.random::<f64>());
        let est = crate::learners::importance_estimate(feedback.get(a), a, p)?;
        let v = est.values()[a];
        sum[a] += v;
        sum_sq[a] += v * v;
    }
    let n = n_samples as f64;
    let mut mean = vec![0.0; k];
    let mut stderr = vec![0.0; k];
    let mut sigma_deviation = vec![0.0; k];
    for i in 0..k {
        mean[i] = sum[i] / n;
        let var = (sum_sq[i] / n - mean[i] * mean[i]).max(0.0);
        stderr[i] = (var / n).sqrt();
        let gap = (mean[i] - feedback.get(i)).abs();
        sigma_deviation[i] = if stderr[i] > 0.0 {
            gap / stderr[i]
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    Ok(McUnbiasedness {
        mean,
        stderr,
        sigma_deviation,
        samples: n_samples,
    })
}

/// Exact expected regret of a learner on a tiny instance, by enumerating
/// every action path with its probability. Validates the harness's Monte
/// Carlo regret estimator. The learner prototype must be freshly
/// constructed (round 1 not yet acted).
pub fn exhaustive_regret_small(
    commitment: &AdversaryCommitment,
    events: &RoundEvents,
    learner: &dyn Learner,
) -> Result<f64, OracleError> {
    let k = commitment.k() as u128;
    let horizon = commitment.horizon() as u32;
    let paths = k.checked_pow(horizon).unwrap_or(u128::MAX);
    if paths > EXHAUSTIVE_PATH_CAP {
        return Err(OracleError::InstanceTooLarge {
            paths,
            cap: EXHAUSTIVE_PATH_CAP,
        });
    }

    struct PathNode {
        agent: Box<dyn Learner>,
        round: usize,
        prob: f64,
        loss_so_far: f64,
        actions: Vec<usize>,
    }

    let mut expected_loss = 0.0f64;
    let mut stack = vec![PathNode {
        agent: learner.clone_box(),
        round: 1,
        prob: 1.0,
        loss_so_far: 0.0,
        actions: Vec::new(),
    }];
    while let Some(PathNode {
        mut agent,
        round: t,
        prob,
        loss_so_far,
        actions,
    }) = stack.pop()
    {
        if t > commitment.horizon() {
            expected_loss += prob * loss_so_far;
            continue;
        }
        let dist = agent.act(t)?;
        for a in 0..commitment.k() {
            let mut branch = agent.clone_box();
            branch.played(t, a)?;
            let mut branch_actions = actions.clone();
            branch_actions.push(a);
            let feedback = build_round_feedback(
                commitment,
                events,
                t,
                branch.info_model(),
                &branch_actions,
            )?;
            branch.observe(t, &feedback)?;
            stack.push(PathNode {
                agent: branch,
                round: t + 1,
                prob: prob * dist.get(a),
                loss_so_far: loss_so_far + commitment.true_loss(t)[a],
                actions: branch_actions,
            });
        }
    }

    let (_, best_total) = best_action_hindsight(&commitment.true_loss_vectors())?;
    Ok(expected_loss - best_total)
}
