//! Follow-the-regularized-leader over importance-weighted estimates.
//!
//! The bandit agent observes, each round, only the revised scalar of the
//! coordinate it actually played at each origin round. Every scalar is
//! importance-weighted by the sampling probability *stored when the origin
//! round was played*; revisions change the observed scalar but never the
//! weight. The cumulative estimate is a frozen prefix plus the mutable
//! window, folded in origin order, and the acting distribution is the
//! simplex argmin under the entropy + log-barrier regularizer. No clipping
//! or smoothing is applied to the estimates; the barrier keeps sampling
//! probabilities bounded away from zero by construction.

use std::collections::VecDeque;

use crate::solver::{solve_argmin_warm, RegularizerParams, WarmState};
use crate::types::{ActionDistribution, DomainError, EstimateVector};

use super::interface::{
    FeedbackValue, InfoModel, Learner, LearnerError, RoundFeedback,
};

/// One-hot importance-weighted estimate: `observed / p[action]` at the
/// played action's coordinate, zero elsewhere.
pub fn importance_estimate(
    observed: f64,
    action: usize,
    sampling: &ActionDistribution,
) -> Result<EstimateVector, LearnerError> {
    if action >= sampling.len() {
        return Err(LearnerError::Domain(DomainError::ActionOutOfRange {
            action,
            k: sampling.len(),
        }));
    }
    let p = sampling.get(action);
    if p.is_nan() || p <= 0.0 {
        return Err(LearnerError::Domain(DomainError::NonPositiveProbability {
            index: action,
            value: p,
        }));
    }
    Ok(EstimateVector::one_hot(
        sampling.len(),
        action,
        observed / p,
    )?)
}

#[derive(Debug, Clone)]
struct FtrlSlot {
    origin: usize,
    action: usize,
    /// Sampling probability of `action` when the origin round was played.
    /// Immutable for the lifetime of the slot.
    prob: f64,
    /// Latest observed scalar for (origin, action).
    latest: f64,
    finalized: bool,
}

#[derive(Debug, Clone)]
pub struct EvolvingFtrl {
    params: RegularizerParams,
    k: usize,
    frozen_sum: Vec<f64>,
    window: VecDeque<FtrlSlot>,
    /// Origins `1..=retired_through` live in `frozen_sum`.
    retired_through: usize,
    warm: Option<WarmState>,
    /// Distribution returned by the latest `act`, awaiting `played`.
    pending: Option<(usize, ActionDistribution)>,
    observed: usize,
}

impl EvolvingFtrl {
    pub fn new(k: usize, params: RegularizerParams) -> Result<Self, LearnerError> {
        if k == 0 {
            return Err(LearnerError::Domain(DomainError::Empty));
        }
        RegularizerParams::new(params.eta, params.barrier)?;
        Ok(Self {
            params,
            k,
            frozen_sum: vec![0.0; k],
            window: VecDeque::new(),
            retired_through: 0,
            warm: None,
            pending: None,
            observed: 0,
        })
    }

    pub fn params(&self) -> &RegularizerParams {
        &self.params
    }

    /// Cumulative importance-weighted estimate, reconstructed from the
    /// frozen prefix and window history in origin order.
    pub fn cumulative_estimate(&self) -> Vec<f64> {
        let mut out = self.frozen_sum.clone();
        for slot in &self.window {
            out[slot.action] += slot.latest / slot.prob;
        }
        out
    }

    /// Stored sampling probability for an origin round still in the window.
    pub fn stored_probability(&self, origin: usize) -> Option<f64> {
        self.window
            .binary_search_by_key(&origin, |s| s.origin)
            .ok()
            .map(|i| self.window[i].prob)
    }

    fn retire_ready(&mut self) {
        while let Some(front) = self.window.front() {
            if !front.finalized {
                break;
            }
            let slot = self.window.pop_front().expect("front checked");
            self.frozen_sum[slot.action] += slot.latest / slot.prob;
            self.retired_through = slot.origin;
        }
    }
}

impl Learner for EvolvingFtrl {
    fn info_model(&self) -> InfoModel {
        InfoModel::Bandit
    }

    fn act(&mut self, t: usize) -> Result<ActionDistribution, LearnerError> {
        if t != self.observed + 1 {
            return Err(LearnerError::RoundOutOfOrder {
                expected: self.observed + 1,
                got: t,
            });
        }
        let l_hat = self.cumulative_estimate();
        let (dist, warm) = solve_argmin_warm(&l_hat, &self.params, self.warm.as_ref())?;
        self.warm = Some(warm);
        self.pending = Some((t, dist.clone()));
        Ok(dist)
    }

    fn played(&mut self, t: usize, action: usize) -> Result<(), LearnerError> {
        let Some((pending_t, dist)) = &self.pending else {
            return Err(LearnerError::MissingPlayed { round: t });
        };
        if *pending_t != t {
            return Err(LearnerError::RoundOutOfOrder {
                expected: *pending_t,
                got: t,
            });
        }
        if action >= self.k {
            return Err(LearnerError::Domain(DomainError::ActionOutOfRange {
                action,
                k: self.k,
            }));
        }
        let prob = dist.get(action);
        self.window.push_back(FtrlSlot {
            origin: t,
            action,
            prob,
            latest: 0.0,
            finalized: false,
        });
        self.pending = None;
        Ok(())
    }

    fn observe(&mut self, t: usize, feedback: &RoundFeedback) -> Result<(), LearnerError> {
        if t != self.observed + 1 {
            return Err(LearnerError::RoundOutOfOrder {
                expected: self.observed + 1,
                got: t,
            });
        }
        if self
            .window
            .back()
            .is_none_or(|slot| slot.origin != t)
        {
            return Err(LearnerError::MissingPlayed { round: t });
        }
        for entry in &feedback.entries {
            let (action, value) = match entry.value {
                FeedbackValue::Played { action, value } => (action, value),
                FeedbackValue::Full(_) => {
                    return Err(LearnerError::WrongPayload {
                        origin: entry.origin,
                        expected: "a played-action scalar",
                    })
                }
            };
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(LearnerError::Domain(DomainError::LossOutOfRange {
                    index: action,
                    value,
                }));
            }
            if entry.origin <= self.retired_through {
                return Err(LearnerError::RevisionAfterFreeze {
                    origin: entry.origin,
                });
            }
            let i = self
                .window
                .binary_search_by_key(&entry.origin, |s| s.origin)
                .map_err(|_| LearnerError::UnknownOrigin {
                    origin: entry.origin,
                })?;
            let slot = &mut self.window[i];
            if slot.finalized {
                return Err(LearnerError::RevisionAfterFreeze {
                    origin: entry.origin,
                });
            }
            if slot.action != action {
                return Err(LearnerError::ActionMismatch {
                    origin: entry.origin,
                    expected: slot.action,
                    got: action,
                });
            }
            slot.latest = value;
            slot.finalized = entry.final_revision;
        }
        self.retire_ready();
        self.observed = t;
        Ok(())
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}
