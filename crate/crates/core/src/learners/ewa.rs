//! Exponential weights over the latest revised cumulative loss.
//!
//! At round `t` the weight of action `i` is `exp(-eta * L_e[i])` where
//! `L_e = sum_{tau <= t-1} (latest revision of round tau as of t-1)`. The
//! cumulative estimate is kept as a frozen prefix (origins whose feedback
//! can no longer change, accumulated in origin order) plus the mutable
//! window, and refolded in origin order on every act so that it equals the
//! from-scratch sum bit for bit.

use std::collections::VecDeque;

use crate::solver::softmax;
use crate::types::{ActionDistribution, DomainError, LossVector};

use super::interface::{
    FeedbackValue, InfoModel, Learner, LearnerError, RoundFeedback,
};

#[derive(Debug, Clone)]
struct WindowSlot {
    origin: usize,
    latest: Vec<f64>,
    finalized: bool,
}

#[derive(Debug, Clone)]
pub struct EvolvingEwa {
    eta: f64,
    k: usize,
    /// Sum of final revisions for retired origins, accumulated in origin
    /// order.
    frozen_sum: Vec<f64>,
    /// Mutable origins, ascending. A finalized slot waits here until every
    /// earlier origin is retired, preserving the accumulation order.
    window: VecDeque<WindowSlot>,
    /// Origins `1..=retired_through` live in `frozen_sum`.
    retired_through: usize,
    observed: usize,
}

impl EvolvingEwa {
    pub fn new(k: usize, eta: f64) -> Result<Self, LearnerError> {
        if k == 0 {
            return Err(LearnerError::Domain(DomainError::Empty));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(LearnerError::Config(format!(
                "ewa requires eta > 0, got {eta}"
            )));
        }
        Ok(Self {
            eta,
            k,
            frozen_sum: vec![0.0; k],
            window: VecDeque::new(),
            retired_through: 0,
            observed: 0,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Current cumulative estimate `L_e`: the frozen prefix plus the window
    /// folded in origin order. Equals the from-scratch sum over all origins
    /// exactly, because both perform the identical sequence of additions.
    pub fn cumulative_estimate(&self) -> Vec<f64> {
        let mut out = self.frozen_sum.clone();
        for slot in &self.window {
            for (o, v) in out.iter_mut().zip(&slot.latest) {
                *o += *v;
            }
        }
        out
    }

    fn retire_ready(&mut self) {
        while let Some(front) = self.window.front() {
            if !front.finalized {
                break;
            }
            let slot = self.window.pop_front().expect("front checked");
            for (o, v) in self.frozen_sum.iter_mut().zip(&slot.latest) {
                *o += *v;
            }
            self.retired_through = slot.origin;
        }
    }
}

impl Learner for EvolvingEwa {
    fn info_model(&self) -> InfoModel {
        InfoModel::FullInfo
    }

    fn act(&mut self, t: usize) -> Result<ActionDistribution, LearnerError> {
        if t != self.observed + 1 {
            return Err(LearnerError::RoundOutOfOrder {
                expected: self.observed + 1,
                got: t,
            });
        }
        let l_e = self.cumulative_estimate();
        Ok(softmax(&l_e, self.eta)?)
    }

    fn played(&mut self, _t: usize, _action: usize) -> Result<(), LearnerError> {
        Ok(())
    }

    fn observe(&mut self, t: usize, feedback: &RoundFeedback) -> Result<(), LearnerError> {
        if t != self.observed + 1 {
            return Err(LearnerError::RoundOutOfOrder {
                expected: self.observed + 1,
                got: t,
            });
        }
        for entry in &feedback.entries {
            let loss = match &entry.value {
                FeedbackValue::Full(v) => v,
                FeedbackValue::Played { .. } => {
                    return Err(LearnerError::WrongPayload {
                        origin: entry.origin,
                        expected: "a full loss vector",
                    })
                }
            };
            if loss.len() != self.k {
                return Err(LearnerError::Domain(DomainError::LengthMismatch {
                    expected: self.k,
                    got: loss.len(),
                }));
            }
            self.upsert(entry.origin, loss, entry.final_revision)?;
        }
        self.retire_ready();
        self.observed = t;
        Ok(())
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

impl EvolvingEwa {
    fn upsert(
        &mut self,
        origin: usize,
        loss: &LossVector,
        final_revision: bool,
    ) -> Result<(), LearnerError> {
        if origin <= self.retired_through {
            return Err(LearnerError::RevisionAfterFreeze { origin });
        }
        match self
            .window
            .binary_search_by_key(&origin, |slot| slot.origin)
        {
            Ok(i) => {
                let slot = &mut self.window[i];
                if slot.finalized {
                    return Err(LearnerError::RevisionAfterFreeze { origin });
                }
                slot.latest.copy_from_slice(loss.values());
                slot.finalized = final_revision;
            }
            Err(i) => {
                if i != self.window.len() {
                    // An origin in the retired prefix is being revised.
                    return Err(LearnerError::RevisionAfterFreeze { origin });
                }
                if self
                    .window
                    .back()
                    .is_some_and(|last| origin <= last.origin)
                {
                    return Err(LearnerError::RevisionAfterFreeze { origin });
                }
                self.window.push_back(WindowSlot {
                    origin,
                    latest: loss.values().to_vec(),
                    finalized: final_revision,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::interface::FeedbackEntry;

    fn full(origin: usize, values: &[f64], final_revision: bool) -> FeedbackEntry {
        FeedbackEntry {
            origin,
            value: FeedbackValue::Full(LossVector::new(values.to_vec()).unwrap()),
            final_revision,
        }
    }

    #[test]
    fn zero_estimate_gives_uniform() {
        let mut ewa = EvolvingEwa::new(3, 0.7).unwrap();
        let d = ewa.act(1).unwrap();
        for i in 0..3 {
            assert!((d.get(i) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_two_actions() {
        // L_e = (0, ln 2) with eta = 1 gives (2/3, 1/3).
        let mut ewa = EvolvingEwa::new(2, 1.0).unwrap();
        ewa.observe(
            1,
            &RoundFeedback {
                entries: vec![full(1, &[0.0, 2.0f64.ln()], true)],
            },
        )
        .unwrap();
        let d = ewa.act(2).unwrap();
        assert!((d.get(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.get(1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_logistic() {
        // eta = 0.5, L_e = (1, 3): p_0 = 1 / (1 + e^{-1}).
        let mut ewa = EvolvingEwa::new(2, 0.5).unwrap();
        ewa.observe(
            1,
            &RoundFeedback {
                entries: vec![full(1, &[0.5, 1.0], false)],
            },
        )
        .unwrap();
        ewa.observe(
            2,
            &RoundFeedback {
                entries: vec![full(1, &[1.0, 1.0], true), full(2, &[0.0, 1.0], true)],
            },
        )
        .unwrap();
        ewa.observe(
            3,
            &RoundFeedback {
                entries: vec![full(3, &[0.0, 1.0], true)],
            },
        )
        .unwrap();
        assert_eq!(ewa.cumulative_estimate(), vec![1.0, 3.0]);
        let d = ewa.act(4).unwrap();
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((d.get(0) - expected).abs() < 1e-15, "{}", d.get(0));
        assert!((d.get(0) - 0.7310585786300049).abs() < 1e-12);
    }

    #[test]
    fn all_zero_feedback_keeps_estimate_zero() {
        let mut ewa = EvolvingEwa::new(2, 0.3).unwrap();
        for t in 1..=5 {
            ewa.act(t).unwrap();
            ewa.observe(
                t,
                &RoundFeedback {
                    entries: vec![full(t, &[0.0, 0.0], false)],
                },
            )
            .unwrap();
        }
        assert_eq!(ewa.cumulative_estimate(), vec![0.0, 0.0]);
    }

    #[test]
    fn retroactive_flip_lands_two_rounds_later() {
        // Round 1's loss flips from 0 to 1 at revision round 3, so the
        // estimate used by act(4) jumps by 1.
        let mut ewa = EvolvingEwa::new(2, 1.0).unwrap();
        ewa.act(1).unwrap();
        ewa.observe(
            1,
            &RoundFeedback {
                entries: vec![full(1, &[0.0, 0.0], false)],
            },
        )
        .unwrap();
        ewa.act(2).unwrap();
        ewa.observe(
            2,
            &RoundFeedback {
                entries: vec![full(2, &[0.0, 0.0], true)],
            },
        )
        .unwrap();
        assert_eq!(ewa.cumulative_estimate(), vec![0.0, 0.0]);
        ewa.act(3).unwrap();
        ewa.observe(
            3,
            &RoundFeedback {
                entries: vec![full(1, &[1.0, 0.0], true), full(3, &[0.0, 0.0], true)],
            },
        )
        .unwrap();
        assert_eq!(ewa.cumulative_estimate(), vec![1.0, 0.0]);
    }

    #[test]
    fn incremental_matches_from_scratch_bitwise() {
        // Drive the learner with revising feedback and retirement, checking
        // the incremental fold against a from-scratch origin-order sum.
        let mut ewa = EvolvingEwa::new(2, 0.4).unwrap();
        let mut latest: Vec<[f64; 2]> = Vec::new();
        let horizon = 200;
        let d = 3usize;
        for t in 1..=horizon {
            ewa.act(t).unwrap();
            let mut entries = Vec::new();
            // Revise the window (including the new round) with synthetic values.
            let lo = t.saturating_sub(d).max(1);
            for tau in lo..=t {
                let v = [
                    ((tau * 31 + t * 7) % 97) as f64 / 96.0,
                    ((tau * 17 + t * 13) % 89) as f64 / 88.0,
                ];
                if latest.len() < tau {
                    latest.push(v);
                } else {
                    latest[tau - 1] = v;
                }
                entries.push(full(tau, &v, t == tau + d));
            }
            ewa.observe(t, &RoundFeedback { entries }).unwrap();

            let mut scratch = [0.0f64; 2];
            for v in &latest {
                scratch[0] += v[0];
                scratch[1] += v[1];
            }
            let incremental = ewa.cumulative_estimate();
            assert_eq!(incremental[0].to_bits(), scratch[0].to_bits());
            assert_eq!(incremental[1].to_bits(), scratch[1].to_bits());
        }
    }

    #[test]
    fn revision_after_freeze_is_rejected() {
        let mut ewa = EvolvingEwa::new(1, 1.0).unwrap();
        ewa.observe(
            1,
            &RoundFeedback {
                entries: vec![full(1, &[0.5], true)],
            },
        )
        .unwrap();
        let err = ewa
            .observe(
                2,
                &RoundFeedback {
                    entries: vec![full(1, &[0.9], false), full(2, &[0.0], false)],
                },
            )
            .unwrap_err();
        assert!(matches!(err, LearnerError::RevisionAfterFreeze { origin: 1 }));
    }

    #[test]
    fn bandit_payload_is_rejected() {
        let mut ewa = EvolvingEwa::new(2, 1.0).unwrap();
        let err = ewa
            .observe(
                1,
                &RoundFeedback {
                    entries: vec![FeedbackEntry {
                        origin: 1,
                        value: FeedbackValue::Played {
                            action: 0,
                            value: 0.5,
                        },
                        final_revision: false,
                    }],
                },
            )
            .unwrap_err();
        assert!(matches!(err, LearnerError::WrongPayload { .. }));
    }
}
