//! Domain types shared by every other module. No algorithm logic lives here.
//!
//! All types are immutable values after construction and safe to share
//! read-only across threads. Validating constructors (`new`) enforce the
//! documented invariants; `from_raw` constructors skip validation and exist
//! for data loaded from external files, which [`validate_trace`] checks
//! after the fact.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sum tolerance for probability vectors.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("vector must not be empty")]
    Empty,
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {value} at index {index} outside [0, 1]")]
    LossOutOfRange { index: usize, value: f64 },
    #[error("entry {value} at index {index} is not finite")]
    NotFinite { index: usize, value: f64 },
    #[error("entry {value} at index {index} is negative")]
    Negative { index: usize, value: f64 },
    #[error("probability {value} at index {index} is not strictly positive")]
    NonPositiveProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, more than {tol} away from 1")]
    ProbabilitySum { sum: f64, tol: f64 },
    #[error("round {round} outside [1, {horizon}]")]
    RoundOutOfRange { round: usize, horizon: usize },
    #[error("revision round {revision} precedes origin round {origin}")]
    RevisionBeforeOrigin { revision: usize, origin: usize },
    #[error("action {action} outside [0, {k})")]
    ActionOutOfRange { action: usize, k: usize },
}

/// One loss value per action for a single round; every entry lies in [0, 1].
///
/// Range checks use the closed interval with exact comparison: environments
/// construct these values, they do not measure them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LossVector {
    values: Vec<f64>,
}

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DomainError> {
        if values.is_empty() {
            return Err(DomainError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(DomainError::NotFinite { index, value });
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(DomainError::LossOutOfRange { index, value });
            }
        }
        Ok(Self { values })
    }

    /// Skips validation. Only for ingesting external data that will go
    /// through [`validate_trace`].
    pub fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            values: vec![0.0; k],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, action: usize) -> f64 {
        self.values[action]
    }
}

/// Importance-weighted loss estimates; nonnegative, may exceed 1.
///
/// A single-round estimate has at most one nonzero entry (the played
/// action's coordinate); running sums accumulate many.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateVector {
    values: Vec<f64>,
}

impl EstimateVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DomainError> {
        if values.is_empty() {
            return Err(DomainError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(DomainError::NotFinite { index, value });
            }
            if value < 0.0 {
                return Err(DomainError::Negative { index, value });
            }
        }
        Ok(Self { values })
    }

    /// Single-round estimate: only the played action's coordinate is nonzero.
    pub fn one_hot(k: usize, action: usize, value: f64) -> Result<Self, DomainError> {
        if action >= k {
            return Err(DomainError::ActionOutOfRange { action, k });
        }
        if !value.is_finite() {
            return Err(DomainError::NotFinite {
                index: action,
                value,
            });
        }
        if value < 0.0 {
            return Err(DomainError::Negative {
                index: action,
                value,
            });
        }
        let mut values = vec![0.0; k];
        values[action] = value;
        Ok(Self { values })
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            values: vec![0.0; k],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Elementwise accumulation, for running sums.
    pub fn add_assign(&mut self, other: &EstimateVector) {
        assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += *b;
        }
    }
}

/// Probability vector over the actions: strictly positive entries summing
/// to 1 within [`PROB_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, DomainError> {
        check_distribution(&probs)?;
        Ok(Self { probs })
    }

    /// Skips validation; for external data checked by [`validate_trace`].
    pub fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, action: usize) -> f64 {
        self.probs[action]
    }

    /// Inverse-CDF sampling over the actions in index order (the fixed
    /// tie-breaking order for cross-platform reproducibility).
    /// `u` must lie in [0, 1).
    pub fn sample_index(&self, u: f64) -> usize {
        let mut cdf = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            cdf += p;
            if u < cdf {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

fn check_distribution(probs: &[f64]) -> Result<(), DomainError> {
    if probs.is_empty() {
        return Err(DomainError::Empty);
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() {
            return Err(DomainError::NotFinite { index, value });
        }
        if value <= 0.0 {
            return Err(DomainError::NonPositiveProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(DomainError::ProbabilitySum {
            sum,
            tol: PROB_SUM_TOL,
        });
    }
    Ok(())
}

/// The adversary's round-`t` revision of the round-`tau` loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackUpdate {
    /// Origin round `tau >= 1`.
    pub origin_round: usize,
    /// Revision round `t >= tau`.
    pub revision_round: usize,
    pub loss: LossVector,
}

impl FeedbackUpdate {
    pub fn validate(&self, k: usize) -> Result<(), DomainError> {
        if self.revision_round < self.origin_round {
            return Err(DomainError::RevisionBeforeOrigin {
                revision: self.revision_round,
                origin: self.origin_round,
            });
        }
        if self.loss.len() != k {
            return Err(DomainError::LengthMismatch {
                expected: k,
                got: self.loss.len(),
            });
        }
        LossVector::new(self.loss.values().to_vec()).map(|_| ())
    }
}

/// Number of rounds after which every feedback revision is frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvolutionHorizon {
    Bounded(usize),
    /// Feedback may differ from the truth forever (corrupted feedback).
    Unbounded,
}

impl EvolutionHorizon {
    pub fn bounded(&self) -> Option<usize> {
        match self {
            EvolutionHorizon::Bounded(d) => Some(*d),
            EvolutionHorizon::Unbounded => None,
        }
    }
}

impl std::fmt::Display for EvolutionHorizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvolutionHorizon::Bounded(d) => write!(f, "{d}"),
            EvolutionHorizon::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Revision history for one origin round, stored as change points: the pair
/// `(gap, value)` means the feedback equals `value` from revision round
/// `origin + gap` until the next change point. Queries past the last change
/// point materialize the frozen value lazily, which keeps the commitment
/// memory proportional to the number of actual changes rather than to the
/// full `T x T` revision table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackRow {
    gaps: Vec<usize>,
    /// Flat, `k` values per change point.
    values: Vec<f64>,
    k: usize,
}

impl FeedbackRow {
    fn value_index_at(&self, gap: usize) -> usize {
        match self.gaps.binary_search(&gap) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    pub fn value_at(&self, gap: usize) -> &[f64] {
        let i = self.value_index_at(gap);
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn change_points(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.gaps
            .iter()
            .enumerate()
            .map(move |(i, &g)| (g, &self.values[i * self.k..(i + 1) * self.k]))
    }

    pub fn last_change_gap(&self) -> usize {
        *self.gaps.last().unwrap_or(&0)
    }

    pub fn has_initial(&self) -> bool {
        self.gaps.first() == Some(&0)
    }
}

/// The adversary's full commitment: true losses for every round plus the
/// entire feedback revision table, fixed before play and independent of any
/// agent action. Immutable; shared via [`Arc`] across episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryCommitment {
    k: usize,
    horizon: usize,
    declared_horizon: EvolutionHorizon,
    /// Flat, `k` values per round, round-major.
    true_losses: Vec<f64>,
    /// Index `tau - 1`.
    rows: Vec<FeedbackRow>,
}

impl AdversaryCommitment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The declared evolution horizon: smallest `d` such that
    /// `feedback(t, tau)` is constant for all `t >= tau + d`, or the
    /// unbounded sentinel when the truth is never revealed.
    pub fn declared_horizon(&self) -> EvolutionHorizon {
        self.declared_horizon
    }

    /// Largest gap at which any stored revision actually changes.
    pub fn observed_horizon(&self) -> usize {
        self.rows
            .iter()
            .map(FeedbackRow::last_change_gap)
            .max()
            .unwrap_or(0)
    }

    /// True loss of round `t` (1-based).
    pub fn true_loss(&self, t: usize) -> &[f64] {
        assert!((1..=self.horizon).contains(&t), "round {t} out of range");
        &self.true_losses[(t - 1) * self.k..t * self.k]
    }

    /// Feedback revision of round `tau` as of revision round `t`
    /// (both 1-based, `tau <= t <= T`). Values past the last stored change
    /// point are the frozen value.
    pub fn feedback(&self, t: usize, tau: usize) -> &[f64] {
        assert!(
            tau >= 1 && tau <= t && t <= self.horizon,
            "feedback query (t={t}, tau={tau}) out of range"
        );
        self.rows[tau - 1].value_at(t - tau)
    }

    pub fn row(&self, tau: usize) -> &FeedbackRow {
        &self.rows[tau - 1]
    }

    pub fn true_loss_vectors(&self) -> Vec<LossVector> {
        (1..=self.horizon)
            .map(|t| LossVector::from_raw(self.true_loss(t).to_vec()))
            .collect()
    }
}

/// Incremental builder for [`AdversaryCommitment`]. Change points must be
/// pushed with ascending gaps per origin; consecutive equal values are
/// deduplicated (they carry no information).
pub struct CommitmentBuilder {
    k: usize,
    horizon: usize,
    true_losses: Vec<f64>,
    rows: Vec<FeedbackRow>,
}

impl CommitmentBuilder {
    pub fn new(k: usize, horizon: usize) -> Self {
        assert!(k >= 1 && horizon >= 1);
        Self {
            k,
            horizon,
            true_losses: vec![0.0; k * horizon],
            rows: (0..horizon)
                .map(|_| FeedbackRow {
                    gaps: Vec::new(),
                    values: Vec::new(),
                    k,
                })
                .collect(),
        }
    }

    pub fn set_true_loss(&mut self, t: usize, loss: &[f64]) {
        assert_eq!(loss.len(), self.k);
        self.true_losses[(t - 1) * self.k..t * self.k].copy_from_slice(loss);
    }

    /// Record that origin `tau`'s feedback becomes `value` at revision round
    /// `tau + gap` (and stays there until the next change point).
    pub fn push_revision(&mut self, tau: usize, gap: usize, value: &[f64]) {
        assert_eq!(value.len(), self.k);
        let row = &mut self.rows[tau - 1];
        if let Some(&last_gap) = row.gaps.last() {
            assert!(gap > last_gap, "change points must have ascending gaps");
            let last = &row.values[row.values.len() - self.k..];
            if last == value {
                return;
            }
        }
        row.gaps.push(gap);
        row.values.extend_from_slice(value);
    }

    pub fn finish(self, declared_horizon: EvolutionHorizon) -> AdversaryCommitment {
        AdversaryCommitment {
            k: self.k,
            horizon: self.horizon,
            declared_horizon,
            true_losses: self.true_losses,
            rows: self.rows,
        }
    }
}

/// Seed for the episode-level random stream. Identical seeds with identical
/// configurations produce bit-identical traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

/// Full episode record: the adversary commitment plus the realized actions
/// and the sampling distribution used at every round.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub commitment: Arc<AdversaryCommitment>,
    /// 0-based action per round, index `t - 1`.
    pub actions: Vec<usize>,
    /// Distribution the action was sampled from, index `t - 1`.
    pub sampling_probs: Vec<ActionDistribution>,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.commitment.horizon()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationRule {
    FrozenAfterHorizon,
    LossOutOfRange,
    ProbabilityInvariant,
    ActionOutOfRange,
    Structural,
}

impl std::fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViolationRule::FrozenAfterHorizon => "frozen-after-d_max",
            ViolationRule::LossOutOfRange => "loss-out-of-range",
            ViolationRule::ProbabilityInvariant => "probability-invariant",
            ViolationRule::ActionOutOfRange => "action-out-of-range",
            ViolationRule::Structural => "structural",
        };
        f.write_str(s)
    }
}

/// One invariant violation found in a trace. Violations are data, not
/// failures; rounds in the message are 1-based.
#[derive(Debug, Clone)]
pub struct TraceViolation {
    pub rule: ViolationRule,
    pub revision_round: Option<usize>,
    pub origin_round: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

/// Check every trace invariant and return the violations found (empty iff
/// the trace is clean):
///
/// - every true loss and feedback entry lies in [0, 1];
/// - every feedback row has an initial revision at `t = tau`;
/// - feedback is frozen after the declared horizon:
///   `feedback(t, tau) == feedback(tau + d_max, tau)` exactly for
///   `t > tau + d_max`;
/// - every sampling distribution is strictly positive and sums to 1 within
///   tolerance;
/// - every action is in range.
pub fn validate_trace(trace: &RunTrace, d_max: EvolutionHorizon) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    let c = &trace.commitment;
    let k = c.k();
    let horizon = c.horizon();

    if trace.actions.len() != horizon {
        out.push(TraceViolation {
            rule: ViolationRule::Structural,
            revision_round: None,
            origin_round: None,
            message: format!(
                "expected {horizon} actions, got {}",
                trace.actions.len()
            ),
        });
    }
    if trace.sampling_probs.len() != horizon {
        out.push(TraceViolation {
            rule: ViolationRule::Structural,
            revision_round: None,
            origin_round: None,
            message: format!(
                "expected {horizon} sampling distributions, got {}",
                trace.sampling_probs.len()
            ),
        });
    }

    for t in 1..=horizon {
        for (i, &v) in c.true_loss(t).iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                out.push(TraceViolation {
                    rule: ViolationRule::LossOutOfRange,
                    revision_round: Some(t),
                    origin_round: Some(t),
                    message: format!("true loss entry {v} for action {} at round {t}", i + 1),
                });
            }
        }
    }

    for tau in 1..=horizon {
        let row = c.row(tau);
        if !row.has_initial() {
            out.push(TraceViolation {
                rule: ViolationRule::Structural,
                revision_round: Some(tau),
                origin_round: Some(tau),
                message: format!("no initial revision stored for origin round {tau}"),
            });
            continue;
        }
        for (gap, value) in row.change_points() {
            let t = tau + gap;
            for (i, &v) in value.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    out.push(TraceViolation {
                        rule: ViolationRule::LossOutOfRange,
                        revision_round: Some(t),
                        origin_round: Some(tau),
                        message: format!(
                            "feedback entry {v} for action {} at (t={t}, tau={tau})",
                            i + 1
                        ),
                    });
                }
            }
        }
        if let EvolutionHorizon::Bounded(d) = d_max {
            let frozen = row.value_at(d).to_vec();
            for (gap, value) in row.change_points() {
                if gap > d && value != frozen.as_slice() {
                    out.push(TraceViolation {
                        rule: ViolationRule::FrozenAfterHorizon,
                        revision_round: Some(tau + gap),
                        origin_round: Some(tau),
                        message: format!(
                            "feedback for origin {tau} changes at t={} but must be frozen from t={}",
                            tau + gap,
                            tau + d
                        ),
                    });
                }
            }
        }
    }

    for (i, dist) in trace.sampling_probs.iter().enumerate() {
        let t = i + 1;
        if dist.probs().len() != k {
            out.push(TraceViolation {
                rule: ViolationRule::Structural,
                revision_round: Some(t),
                origin_round: None,
                message: format!(
                    "distribution at round {t} has {} entries, expected {k}",
                    dist.probs().len()
                ),
            });
            continue;
        }
        if let Err(e) = check_distribution(dist.probs()) {
            out.push(TraceViolation {
                rule: ViolationRule::ProbabilityInvariant,
                revision_round: Some(t),
                origin_round: None,
                message: format!("distribution at round {t}: {e}"),
            });
        }
    }

    for (i, &a) in trace.actions.iter().enumerate() {
        if a >= k {
            out.push(TraceViolation {
                rule: ViolationRule::ActionOutOfRange,
                revision_round: Some(i + 1),
                origin_round: None,
                message: format!("action {} at round {} outside 1..={k}", a + 1, i + 1),
            });
        }
    }

    out
}
