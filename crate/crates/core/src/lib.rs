//! Regret minimization under feedback that evolves retroactively.
//!
//! An oblivious adversary fixes, ahead of play, both the true per-round
//! losses and a table of *feedback revisions*: at round `t` the agent
//! observes a fresh estimate of every past round's loss, which may override
//! anything seen before and may never converge to the truth. This crate
//! provides:
//!
//! - [`learners`]: the evolving exponential-weights learner (full
//!   information), the evolving FTRL learner (bandit information, negative
//!   entropy plus log-barrier regularization), a skipping wrapper that
//!   freezes feedback after a configurable number of rounds, and the
//!   closed-form tuning rules for both learners;
//! - [`environments`]: adversary constructions (delayed, optimistic
//!   delayed, corrupted, composite, decaying-noise, scripted) that commit
//!   to the full revision table up front;
//! - [`metrics`]: feedback-accuracy quantities computed from a commitment
//!   alone (total inaccuracy `D`, the inaccuracy coefficients and their
//!   per-round schedule, the clipped aggregate `Lambda`, corruption
//!   budget);
//! - [`solver`]: the simplex argmin for the entropy + log-barrier
//!   regularizer with a checkable stationarity certificate;
//! - [`oracle`]: brute-force references (grid argmin, hindsight scan,
//!   Monte Carlo unbiasedness, exhaustive small-instance regret);
//! - [`harness`]: seeded episode runner, seed sweeps, regret curves,
//!   theoretical bound overlays and CSV/JSON interfaces.
//!
//! Rounds are 1-based (`t`, `tau` in `1..=T`) throughout. Action indices
//! are 0-based in code and 1-based in every external interface (CSV, JSON,
//! violation messages).

pub mod environments;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod solver;
pub mod types;

pub use types::{
    ActionDistribution, AdversaryCommitment, DomainError, EstimateVector, EvolutionHorizon,
    FeedbackUpdate, LossVector, RngSeed, RunTrace, TraceViolation,
};
