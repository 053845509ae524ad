//! The learner interface and the feedback payload it consumes.
//!
//! Interaction protocol for round `t`:
//!
//! 1. `act(t)` returns the action distribution, a deterministic function of
//!    every observation with revision round `< t` and the learner's fixed
//!    parameters;
//! 2. the runner samples an action and reports it through `played(t, a)`;
//! 3. `observe(t, feedback)` delivers the round-`t` revisions.
//!
//! The payload carries one entry per origin round whose revision *changed*
//! at `t` (origin `t` itself always appears), plus a final marker when an
//! origin's feedback freezes. After an entry was final, no further
//! revisions for that origin may arrive; learners rely on this to retire
//! old rounds into a frozen cumulative prefix and keep only the mutable
//! window in memory.

use thiserror::Error;

use crate::solver::SolverError;
use crate::types::{ActionDistribution, DomainError, LossVector};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("round {got} out of order, expected {expected}")]
    RoundOutOfOrder { expected: usize, got: usize },
    #[error("feedback for origin {origin} arrived after it was frozen")]
    RevisionAfterFreeze { origin: usize },
    #[error("no recorded action for origin round {origin}")]
    UnknownOrigin { origin: usize },
    #[error("feedback entry for origin {origin} names action {got}, round was played with {expected}")]
    ActionMismatch {
        origin: usize,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} feedback for origin {origin}")]
    WrongPayload {
        origin: usize,
        expected: &'static str,
    },
    #[error("action was not reported for round {round} before observe")]
    MissingPlayed { round: usize },
    #[error("learner config: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// What the environment reveals each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoModel {
    /// All coordinates of every revision.
    FullInfo,
    /// Only the coordinate of the action played at the origin round.
    Bandit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeedbackValue {
    /// Full revision vector (full-information learners).
    Full(LossVector),
    /// Scalar revision of the played action's coordinate (bandit learners).
    Played { action: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackEntry {
    /// Origin round `tau` the revision refers to.
    pub origin: usize,
    pub value: FeedbackValue,
    /// True when this is the last revision this origin will ever receive.
    pub final_revision: bool,
}

/// All revisions delivered at one round, ascending by origin.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundFeedback {
    pub entries: Vec<FeedbackEntry>,
}

pub trait Learner: Send {
    fn info_model(&self) -> InfoModel;

    /// Action distribution for round `t`.
    fn act(&mut self, t: usize) -> Result<ActionDistribution, LearnerError>;

    /// Report the sampled action for round `t` (called between `act` and
    /// `observe`).
    fn played(&mut self, t: usize, action: usize) -> Result<(), LearnerError>;

    /// Deliver the round-`t` feedback payload.
    fn observe(&mut self, t: usize, feedback: &RoundFeedback) -> Result<(), LearnerError>;

    fn clone_box(&self) -> Box<dyn Learner>;
}

impl Clone for Box<dyn Learner> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}
