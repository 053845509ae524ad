//! Wrapper that freezes feedback after a configurable number of rounds.
//!
//! Revisions with `t <= origin + d_max` pass through unchanged; the value
//! held at `origin + d_max` is frozen and every later outer revision for
//! that origin is dropped, so the wrapped agent's view always satisfies the
//! `d_max`-freezing invariant regardless of the outer environment. The
//! wrapper never touches actions or distributions: the outer action
//! distribution is exactly the inner one's.

use std::collections::VecDeque;

use crate::types::ActionDistribution;

use super::interface::{
    FeedbackEntry, FeedbackValue, InfoModel, Learner, LearnerError, RoundFeedback,
};

#[derive(Clone)]
struct CacheSlot {
    origin: usize,
    value: FeedbackValue,
    /// Received an outer revision this round.
    touched: bool,
}

pub struct SkippingWrapper {
    inner: Box<dyn Learner>,
    d_max: usize,
    /// Origins not yet frozen for the inner learner, ascending.
    cache: VecDeque<CacheSlot>,
    observed: usize,
}

/// Wrap `inner` so its feedback view freezes `d_max` rounds after each
/// origin.
pub fn skip_wrap(inner: Box<dyn Learner>, d_max: usize) -> Box<dyn Learner> {
    Box::new(SkippingWrapper::new(inner, d_max))
}

impl SkippingWrapper {
    pub fn new(inner: Box<dyn Learner>, d_max: usize) -> Self {
        Self {
            inner,
            d_max,
            cache: VecDeque::new(),
            observed: 0,
        }
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }
}

impl Learner for SkippingWrapper {
    fn info_model(&self) -> InfoModel {
        self.inner.info_model()
    }

    fn act(&mut self, t: usize) -> Result<ActionDistribution, LearnerError> {
        self.inner.act(t)
    }

    fn played(&mut self, t: usize, action: usize) -> Result<(), LearnerError> {
        self.inner.played(t, action)
    }

    fn observe(&mut self, t: usize, feedback: &RoundFeedback) -> Result<(), LearnerError> {
        if t != self.observed + 1 {
            return Err(LearnerError::RoundOutOfOrder {
                expected: self.observed + 1,
                got: t,
            });
        }
        // Outer finals that arrived before the freeze gap end the origin
        // early (no further changes are coming, so the views coincide).
        let mut outer_finals: Vec<usize> = Vec::new();
        for entry in &feedback.entries {
            if entry.origin + self.d_max < t {
                // Post-freeze revision of an outer environment with a longer
                // horizon; the inner view keeps the frozen value.
                continue;
            }
            match self
                .cache
                .binary_search_by_key(&entry.origin, |s| s.origin)
            {
                Ok(i) => {
                    let slot = &mut self.cache[i];
                    slot.value = entry.value.clone();
                    slot.touched = true;
                }
                Err(i) => {
                    if i != self.cache.len() {
                        return Err(LearnerError::RevisionAfterFreeze {
                            origin: entry.origin,
                        });
                    }
                    self.cache.push_back(CacheSlot {
                        origin: entry.origin,
                        value: entry.value.clone(),
                        touched: true,
                    });
                }
            }
            if entry.final_revision {
                outer_finals.push(entry.origin);
            }
        }

        let mut entries = Vec::new();
        let mut retained = VecDeque::with_capacity(self.cache.len());
        for mut slot in self.cache.drain(..) {
            let force_freeze = t >= slot.origin + self.d_max;
            let outer_final = outer_finals.contains(&slot.origin);
            let final_revision = force_freeze || outer_final;
            if slot.touched || final_revision {
                entries.push(FeedbackEntry {
                    origin: slot.origin,
                    value: slot.value.clone(),
                    final_revision,
                });
            }
            slot.touched = false;
            if !final_revision {
                retained.push_back(slot);
            }
        }
        self.cache = retained;
        self.observed = t;
        self.inner.observe(t, &RoundFeedback { entries })
    }

    fn clone_box(&self) -> Box<dyn Learner> {
        Box::new(SkippingWrapper {
            inner: self.inner.clone_box(),
            d_max: self.d_max,
            cache: self.cache.clone(),
            observed: self.observed,
        })
    }
}
