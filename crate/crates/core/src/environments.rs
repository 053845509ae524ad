//! Oblivious adversaries: true losses and all feedback revisions are fixed
//! before play, as pure functions of the spec and its seed. No environment
//! output ever reads an agent action (the interfaces have no action
//! parameter), which is what makes the commitment reusable across seeds.
//!
//! Six constructions are provided:
//!
//! - `delayed`: round `tau`'s loss is invisible (all zeros) until revision
//!   round `tau + d_tau`, then exact;
//! - `optimistic_delayed`: a noisy hint stands in for the loss until the
//!   exact value arrives `d` rounds later;
//! - `corrupted`: a corrupted loss is observed immediately and the truth is
//!   never revealed;
//! - `composite`: the loss is revealed as `d` consecutive partial sums
//!   whose prefixes stay in `[0,1]^K` (negative partials allowed);
//! - `noisy_decay`: feedback is the truth plus a perturbation that decays
//!   geometrically with the revision gap and vanishes at a cutoff;
//! - `scripted`: an explicit revision table loaded from JSON, for exact
//!   regression fixtures.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::{FeedbackEntry, FeedbackValue, InfoModel, RoundFeedback};
use crate::rng::{streams, CounterRng};
use crate::types::{
    AdversaryCommitment, CommitmentBuilder, DomainError, EvolutionHorizon, LossVector,
};

/// Default memory budget for materializing a commitment (bytes).
pub const DEFAULT_MATERIALIZE_BUDGET: usize = 2 << 30;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment spec: {0}")]
    InvalidSpec(String),
    #[error("script: {0}")]
    Script(String),
    #[error("materializing needs about {needed} bytes, budget is {budget}")]
    MemoryBudget { needed: usize, budget: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Deterministic generator of true losses from the environment seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLossSource {
    /// Independent uniform draws in [0, 1) per round and action.
    #[default]
    Uniform,
    /// The same vector every round.
    Constant { values: Vec<f64> },
    /// Per-action means plus uniform noise in [-noise, noise], clipped.
    Gapped {
        means: Vec<f64>,
        #[serde(default)]
        noise: f64,
    },
    /// Explicit per-round table (row `t - 1`).
    Table { losses: Vec<Vec<f64>> },
}

/// Per-round delays: a single constant or one value per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DelaySchedule {
    Constant(usize),
    PerRound(Vec<usize>),
}

impl DelaySchedule {
    pub fn at(&self, t: usize) -> usize {
        match self {
            DelaySchedule::Constant(d) => *d,
            DelaySchedule::PerRound(v) => v[t - 1],
        }
    }

    pub fn max(&self) -> usize {
        match self {
            DelaySchedule::Constant(d) => *d,
            DelaySchedule::PerRound(v) => v.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn total(&self, horizon: usize) -> f64 {
        match self {
            DelaySchedule::Constant(d) => (*d * horizon) as f64,
            DelaySchedule::PerRound(v) => v.iter().map(|&d| d as f64).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CorruptionModel {
    /// Reverse the coordinate order of the true loss on the first `rounds`
    /// rounds.
    ReverseFirst { rounds: usize },
    /// Add `delta` to every coordinate (clipped) on the first `rounds`
    /// rounds.
    ShiftFirst { rounds: usize, delta: f64 },
    /// Explicit corrupted loss per round.
    Table { losses: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PartialSchedule {
    /// Split each loss into `d` nonnegative parts by sorted-uniform
    /// stick-breaking (prefix sums increase towards the loss).
    RandomPositive,
    /// Prefix sums overshoot and undershoot the loss with linearly decaying
    /// amplitude, producing negative partials; everything is clipped into
    /// [0, 1].
    Telescoping { amplitude: f64 },
}

/// Scripted-environment table. External JSON schema (1-based `t`, `tau`):
/// `{ "K": int, "T": int, "true": [[..K..] x T],
///    "feedback": [{ "t": int, "tau": int, "loss": [..K..] }, ...] }`.
/// Unspecified `(t, tau)` pairs keep the most recent revision for `tau`
/// (frozen), and `(tau, tau)` defaults to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTable {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "true")]
    pub true_losses: Vec<Vec<f64>>,
    #[serde(default)]
    pub feedback: Vec<ScriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub t: usize,
    pub tau: usize,
    pub loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackKind {
    Scripted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        script: Option<ScriptedTable>,
    },
    Delayed {
        delay: DelaySchedule,
    },
    OptimisticDelayed {
        delay: usize,
        #[serde(default)]
        hint_noise: f64,
    },
    Corrupted {
        corruption: CorruptionModel,
    },
    Composite {
        d: usize,
        partials: PartialSchedule,
    },
    NoisyDecay {
        epsilon0: f64,
        rho: f64,
        cutoff: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub base: BaseLossSource,
    #[serde(flatten)]
    pub kind: FeedbackKind,
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn check_loss_table(table: &[Vec<f64>], k: usize, rows: usize, what: &str) -> Result<(), EnvError> {
    if table.len() != rows {
        return Err(EnvError::InvalidSpec(format!(
            "{what} table has {} rows, expected {rows}",
            table.len()
        )));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != k {
            return Err(EnvError::InvalidSpec(format!(
                "{what} row {} has {} entries, expected {k}",
                i + 1,
                row.len()
            )));
        }
        for &v in row {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(EnvError::InvalidSpec(format!(
                    "{what} row {} has entry {v} outside [0, 1]",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// Change points of one origin's revision history: `(gap, value)` pairs
/// with ascending gaps.
type ChangePoints = Vec<(usize, Vec<f64>)>;

/// A validated environment: the pure-function view of one adversary.
pub struct Environment {
    spec: EnvironmentSpec,
    /// Prebuilt rows for the scripted kind (origin-indexed change points).
    script_rows: Option<Vec<ChangePoints>>,
}

impl Environment {
    pub fn new(spec: EnvironmentSpec) -> Result<Self, EnvError> {
        if spec.k == 0 || spec.horizon == 0 {
            return Err(EnvError::InvalidSpec(
                "need at least one action and one round".into(),
            ));
        }
        let k = spec.k;
        let horizon = spec.horizon;

        match &spec.base {
            BaseLossSource::Uniform => {}
            BaseLossSource::Constant { values } => {
                check_loss_table(std::slice::from_ref(values), k, 1, "constant base")?
            }
            BaseLossSource::Gapped { means, noise } => {
                check_loss_table(std::slice::from_ref(means), k, 1, "gapped means")?;
                if !noise.is_finite() || *noise < 0.0 {
                    return Err(EnvError::InvalidSpec(format!(
                        "gapped noise must be nonnegative, got {noise}"
                    )));
                }
            }
            BaseLossSource::Table { losses } => check_loss_table(losses, k, horizon, "base")?,
        }

        let mut script_rows = None;
        match &spec.kind {
            FeedbackKind::Scripted { path, script } => {
                let table = match (path, script) {
                    (Some(p), None) => {
                        let text = std::fs::read_to_string(p).map_err(|e| {
                            EnvError::Script(format!("reading {}: {e}", p.display()))
                        })?;
                        serde_json::from_str::<ScriptedTable>(&text)
                            .map_err(|e| EnvError::Script(format!("parsing {}: {e}", p.display())))?
                    }
                    (None, Some(s)) => s.clone(),
                    _ => {
                        return Err(EnvError::InvalidSpec(
                            "scripted kind needs exactly one of path or script".into(),
                        ))
                    }
                };
                if table.k != k || table.t != horizon {
                    return Err(EnvError::Script(format!(
                        "script is K={} T={}, spec says K={k} T={horizon}",
                        table.k, table.t
                    )));
                }
                check_loss_table(&table.true_losses, k, horizon, "script true")?;
                script_rows = Some(Self::build_script_rows(&table, k, horizon)?);
                // Replace the base with the script's table so true_loss has
                // one source of truth.
                let mut spec = spec;
                spec.base = BaseLossSource::Table {
                    losses: table.true_losses.clone(),
                };
                let env = Self { spec, script_rows };
                return Ok(env);
            }
            FeedbackKind::Delayed { delay } => {
                if let DelaySchedule::PerRound(v) = delay {
                    if v.len() != horizon {
                        return Err(EnvError::InvalidSpec(format!(
                            "per-round delays have {} entries, expected {horizon}",
                            v.len()
                        )));
                    }
                }
            }
            FeedbackKind::OptimisticDelayed { hint_noise, .. } => {
                if !hint_noise.is_finite() || *hint_noise < 0.0 {
                    return Err(EnvError::InvalidSpec(format!(
                        "hint_noise must be nonnegative, got {hint_noise}"
                    )));
                }
            }
            FeedbackKind::Corrupted { corruption } => match corruption {
                CorruptionModel::Table { losses } => {
                    check_loss_table(losses, k, horizon, "corruption")?
                }
                CorruptionModel::ShiftFirst { delta, .. } => {
                    if !delta.is_finite() {
                        return Err(EnvError::InvalidSpec("corruption delta must be finite".into()));
                    }
                }
                CorruptionModel::ReverseFirst { .. } => {}
            },
            FeedbackKind::Composite { d, partials } => {
                if *d == 0 {
                    return Err(EnvError::InvalidSpec(
                        "composite needs at least one partial".into(),
                    ));
                }
                if let PartialSchedule::Telescoping { amplitude } = partials {
                    if !amplitude.is_finite() || *amplitude < 0.0 {
                        return Err(EnvError::InvalidSpec(format!(
                            "telescoping amplitude must be nonnegative, got {amplitude}"
                        )));
                    }
                }
            }
            FeedbackKind::NoisyDecay { epsilon0, rho, .. } => {
                if !epsilon0.is_finite() || *epsilon0 < 0.0 {
                    return Err(EnvError::InvalidSpec(format!(
                        "epsilon0 must be nonnegative, got {epsilon0}"
                    )));
                }
                if !rho.is_finite() || !(0.0..=1.0).contains(rho) {
                    return Err(EnvError::InvalidSpec(format!(
                        "rho must lie in [0, 1], got {rho}"
                    )));
                }
            }
        }

        let env = Self { spec, script_rows };
        if matches!(env.spec.kind, FeedbackKind::Composite { .. }) {
            env.verify_composite_prefixes()?;
        }
        Ok(env)
    }

    fn build_script_rows(
        table: &ScriptedTable,
        k: usize,
        horizon: usize,
    ) -> Result<Vec<ChangePoints>, EnvError> {
        let mut rows: Vec<ChangePoints> = vec![Vec::new(); horizon];
        let mut sorted: Vec<&ScriptEntry> = table.feedback.iter().collect();
        sorted.sort_by_key(|e| (e.tau, e.t));
        for w in sorted.windows(2) {
            if w[0].tau == w[1].tau && w[0].t == w[1].t {
                return Err(EnvError::Script(format!(
                    "duplicate feedback entry for (t={}, tau={})",
                    w[0].t, w[0].tau
                )));
            }
        }
        for e in sorted {
            if e.tau == 0 || e.t < e.tau || e.t > horizon {
                return Err(EnvError::Script(format!(
                    "feedback entry (t={}, tau={}) out of range for T={horizon}",
                    e.t, e.tau
                )));
            }
            if e.loss.len() != k {
                return Err(EnvError::Script(format!(
                    "feedback entry (t={}, tau={}) has {} values, expected {k}",
                    e.t,
                    e.tau,
                    e.loss.len()
                )));
            }
            for &v in &e.loss {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(EnvError::Script(format!(
                        "feedback entry (t={}, tau={}) has value {v} outside [0, 1]",
                        e.t, e.tau
                    )));
                }
            }
            let row = &mut rows[e.tau - 1];
            if row.is_empty() && e.t > e.tau {
                // (tau, tau) defaults to all zeros.
                row.push((0, vec![0.0; k]));
            }
            row.push((e.t - e.tau, e.loss.clone()));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                // No entries at all: observed as zeros from the start.
                row.push((0, vec![0.0; k]));
            }
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0), "row {i} unsorted");
        }
        Ok(rows)
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    fn check_round(&self, t: usize) -> Result<(), EnvError> {
        if t == 0 || t > self.spec.horizon {
            return Err(EnvError::Domain(DomainError::RoundOutOfRange {
                round: t,
                horizon: self.spec.horizon,
            }));
        }
        Ok(())
    }

    fn base_rng(&self) -> CounterRng {
        CounterRng::new(self.spec.seed, streams::BASE_LOSS, 2 * self.spec.k as u64)
    }

    fn base_loss(&self, t: usize) -> Vec<f64> {
        use rand::Rng;
        match &self.spec.base {
            BaseLossSource::Uniform => {
                let mut rng = self.base_rng().at(t as u64);
                (0..self.spec.k).map(|_| rng.random::<f64>()).collect()
            }
            BaseLossSource::Constant { values } => values.clone(),
            BaseLossSource::Gapped { means, noise } => {
                let mut rng = self.base_rng().at(t as u64);
                means
                    .iter()
                    .map(|&m| {
                        let u: f64 = rng.random();
                        clip01(m + noise * (2.0 * u - 1.0))
                    })
                    .collect()
            }
            BaseLossSource::Table { losses } => losses[t - 1].clone(),
        }
    }

    /// True loss of round `t`; deterministic in `(spec, seed, t)` and
    /// independent of any agent action.
    pub fn true_loss(&self, t: usize) -> Result<LossVector, EnvError> {
        self.check_round(t)?;
        Ok(LossVector::new(self.base_loss(t))?)
    }

    fn hint(&self, tau: usize, noise: f64) -> Vec<f64> {
        use rand::Rng;
        let mut rng =
            CounterRng::new(self.spec.seed, streams::HINT, 2 * self.spec.k as u64).at(tau as u64);
        self.base_loss(tau)
            .iter()
            .map(|&l| {
                let u: f64 = rng.random();
                clip01(l + noise * (2.0 * u - 1.0))
            })
            .collect()
    }

    fn perturbation(&self, tau: usize) -> Vec<f64> {
        use rand::Rng;
        let mut rng =
            CounterRng::new(self.spec.seed, streams::PERTURB, 2 * self.spec.k as u64).at(tau as u64);
        let raw: Vec<f64> = (0..self.spec.k)
            .map(|_| 2.0 * rng.random::<f64>() - 1.0)
            .collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            let mut e = vec![0.0; self.spec.k];
            e[0] = 1.0;
            return e;
        }
        raw.into_iter().map(|v| v / norm).collect()
    }

    fn corrupted_loss(&self, tau: usize, model: &CorruptionModel) -> Vec<f64> {
        let truth = self.base_loss(tau);
        match model {
            CorruptionModel::ReverseFirst { rounds } => {
                if tau <= *rounds {
                    truth.into_iter().rev().collect()
                } else {
                    truth
                }
            }
            CorruptionModel::ShiftFirst { rounds, delta } => {
                if tau <= *rounds {
                    truth.into_iter().map(|v| clip01(v + delta)).collect()
                } else {
                    truth
                }
            }
            CorruptionModel::Table { losses } => losses[tau - 1].clone(),
        }
    }

    /// Sorted stick-breaking cuts for the composite splitting, one ascending
    /// sequence of `d - 1` fractions per coordinate.
    fn composite_cuts(&self, tau: usize, d: usize) -> Vec<Vec<f64>> {
        use rand::Rng;
        let k = self.spec.k;
        let words = 2 * (k * d.saturating_sub(1)).max(1) as u64;
        let mut rng = CounterRng::new(self.spec.seed, streams::PARTIAL, words).at(tau as u64);
        (0..k)
            .map(|_| {
                let mut cuts: Vec<f64> = (0..d.saturating_sub(1))
                    .map(|_| rng.random::<f64>())
                    .collect();
                cuts.sort_by(|a, b| a.partial_cmp(b).expect("cuts are finite"));
                cuts
            })
            .collect()
    }

    /// Prefix sum of the first `s` partial losses of round `tau`
    /// (`1 <= s <= d`); `prefix(d)` equals the true loss exactly.
    fn composite_prefix(
        &self,
        tau: usize,
        s: usize,
        d: usize,
        partials: &PartialSchedule,
    ) -> Vec<f64> {
        let truth = self.base_loss(tau);
        if s >= d {
            return truth;
        }
        match partials {
            PartialSchedule::RandomPositive => {
                let cuts = self.composite_cuts(tau, d);
                truth
                    .iter()
                    .zip(&cuts)
                    .map(|(&l, c)| l * c[s - 1])
                    .collect()
            }
            PartialSchedule::Telescoping { amplitude } => {
                let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
                let scale = (d - s) as f64 / d as f64;
                truth
                    .iter()
                    .map(|&l| clip01(l + sign * amplitude * scale))
                    .collect()
            }
        }
    }

    fn verify_composite_prefixes(&self) -> Result<(), EnvError> {
        let FeedbackKind::Composite { d, partials } = &self.spec.kind else {
            return Ok(());
        };
        for tau in 1..=self.spec.horizon {
            for s in 1..=*d {
                let prefix = self.composite_prefix(tau, s, *d, partials);
                for (i, &v) in prefix.iter().enumerate() {
                    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                        return Err(EnvError::InvalidSpec(format!(
                            "composite prefix sum {v} outside [0, 1] at tau={tau}, s={s}, action {}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Feedback revision of round `tau` as of revision round `t`, per the
    /// kind's construction. Pure in `(spec, seed, t, tau)`.
    pub fn feedback_loss(&self, t: usize, tau: usize) -> Result<LossVector, EnvError> {
        self.check_round(t)?;
        self.check_round(tau)?;
        if tau > t {
            return Err(EnvError::Domain(DomainError::RevisionBeforeOrigin {
                revision: t,
                origin: tau,
            }));
        }
        let values = match &self.spec.kind {
            FeedbackKind::Scripted { .. } => {
                let row = &self.script_rows.as_ref().expect("validated")[tau - 1];
                let gap = t - tau;
                let idx = match row.binary_search_by_key(&gap, |(g, _)| *g) {
                    Ok(i) => i,
                    Err(0) => 0,
                    Err(i) => i - 1,
                };
                row[idx].1.clone()
            }
            FeedbackKind::Delayed { delay } => {
                if t >= tau + delay.at(tau) {
                    self.base_loss(tau)
                } else {
                    vec![0.0; self.spec.k]
                }
            }
            FeedbackKind::OptimisticDelayed { delay, hint_noise } => {
                if t >= tau + delay {
                    self.base_loss(tau)
                } else {
                    self.hint(tau, *hint_noise)
                }
            }
            FeedbackKind::Corrupted { corruption } => self.corrupted_loss(tau, corruption),
            FeedbackKind::Composite { d, partials } => {
                let s = (t - tau + 1).min(*d);
                self.composite_prefix(tau, s, *d, partials)
            }
            FeedbackKind::NoisyDecay {
                epsilon0,
                rho,
                cutoff,
            } => {
                let gap = t - tau;
                if gap >= *cutoff || *epsilon0 == 0.0 {
                    self.base_loss(tau)
                } else {
                    let eps = epsilon0 * rho.powi(gap as i32);
                    let u = self.perturbation(tau);
                    self.base_loss(tau)
                        .iter()
                        .zip(&u)
                        .map(|(&l, &ui)| clip01(l + eps * ui))
                        .collect()
                }
            }
        };
        Ok(LossVector::new(values)?)
    }

    /// All candidate change points `(gap, value)` for origin `tau`,
    /// ascending, restricted to the horizon. Consumers deduplicate equal
    /// consecutive values.
    fn changes_for(&self, tau: usize) -> ChangePoints {
        let horizon = self.spec.horizon;
        let within = |gap: usize| tau + gap <= horizon;
        match &self.spec.kind {
            FeedbackKind::Scripted { .. } => {
                self.script_rows.as_ref().expect("validated")[tau - 1].clone()
            }
            FeedbackKind::Delayed { delay } => {
                let d = delay.at(tau);
                if d == 0 {
                    vec![(0, self.base_loss(tau))]
                } else {
                    let mut out = vec![(0, vec![0.0; self.spec.k])];
                    if within(d) {
                        out.push((d, self.base_loss(tau)));
                    }
                    out
                }
            }
            FeedbackKind::OptimisticDelayed { delay, hint_noise } => {
                if *delay == 0 {
                    vec![(0, self.base_loss(tau))]
                } else {
                    let mut out = vec![(0, self.hint(tau, *hint_noise))];
                    if within(*delay) {
                        out.push((*delay, self.base_loss(tau)));
                    }
                    out
                }
            }
            FeedbackKind::Corrupted { corruption } => {
                vec![(0, self.corrupted_loss(tau, corruption))]
            }
            FeedbackKind::Composite { d, partials } => (1..=*d)
                .filter(|s| within(s - 1))
                .map(|s| (s - 1, self.composite_prefix(tau, s, *d, partials)))
                .collect(),
            FeedbackKind::NoisyDecay {
                epsilon0,
                rho,
                cutoff,
            } => {
                if *epsilon0 == 0.0 || *cutoff == 0 {
                    return vec![(0, self.base_loss(tau))];
                }
                let truth = self.base_loss(tau);
                let u = self.perturbation(tau);
                let mut out: ChangePoints = (0..*cutoff)
                    .filter(|g| within(*g))
                    .map(|g| {
                        let eps = epsilon0 * rho.powi(g as i32);
                        let v = truth
                            .iter()
                            .zip(&u)
                            .map(|(&l, &ui)| clip01(l + eps * ui))
                            .collect();
                        (g, v)
                    })
                    .collect();
                if within(*cutoff) {
                    out.push((*cutoff, truth));
                }
                out
            }
        }
    }

    /// Declared evolution horizon: the smallest `d` such that
    /// `feedback_loss(t, tau)` is constant in `t` for all `t >= tau + d`
    /// (within the horizon), or the unbounded sentinel for the corrupted
    /// kind, whose feedback never approaches the truth.
    pub fn evolution_horizon(&self) -> EvolutionHorizon {
        if matches!(self.spec.kind, FeedbackKind::Corrupted { .. }) {
            return EvolutionHorizon::Unbounded;
        }
        let mut max_gap = 0usize;
        for tau in 1..=self.spec.horizon {
            let changes = self.changes_for(tau);
            for w in changes.windows(2) {
                if w[0].1 != w[1].1 {
                    max_gap = max_gap.max(w[1].0);
                }
            }
        }
        EvolutionHorizon::Bounded(max_gap)
    }

    fn estimated_entries(&self) -> usize {
        let t = self.spec.horizon;
        match &self.spec.kind {
            FeedbackKind::Scripted { .. } => {
                t + self
                    .script_rows
                    .as_ref()
                    .map(|r| r.iter().map(Vec::len).sum())
                    .unwrap_or(0)
            }
            FeedbackKind::Delayed { .. } | FeedbackKind::OptimisticDelayed { .. } => 2 * t,
            FeedbackKind::Corrupted { .. } => t,
            FeedbackKind::Composite { d, .. } => t * d,
            FeedbackKind::NoisyDecay { cutoff, .. } => t * (cutoff + 1),
        }
    }

    /// Materialize the full adversary commitment (true losses plus the
    /// change-point feedback table) so metrics and oracles can work without
    /// replaying the environment.
    pub fn materialize(&self) -> Result<AdversaryCommitment, EnvError> {
        self.materialize_with_budget(DEFAULT_MATERIALIZE_BUDGET)
    }

    pub fn materialize_with_budget(
        &self,
        budget_bytes: usize,
    ) -> Result<AdversaryCommitment, EnvError> {
        let needed = self
            .estimated_entries()
            .saturating_mul(self.spec.k)
            .saturating_mul(16);
        if needed > budget_bytes {
            return Err(EnvError::MemoryBudget {
                needed,
                budget: budget_bytes,
            });
        }
        let mut builder = CommitmentBuilder::new(self.spec.k, self.spec.horizon);
        for t in 1..=self.spec.horizon {
            let loss = self.true_loss(t)?;
            builder.set_true_loss(t, loss.values());
        }
        for tau in 1..=self.spec.horizon {
            for (gap, value) in self.changes_for(tau) {
                LossVector::new(value.clone())?;
                builder.push_revision(tau, gap, &value);
            }
        }
        Ok(builder.finish(self.evolution_horizon()))
    }
}

/// Revelation schedule derived from a commitment: for each round, which
/// origins receive a (changed) revision and which of those are final.
/// Shared read-only across every episode on the same commitment.
#[derive(Debug, Clone)]
pub struct RoundEvents {
    per_round: Vec<Vec<RoundEvent>>,
}

#[derive(Debug, Clone, Copy)]
pub struct RoundEvent {
    pub origin: usize,
    pub final_revision: bool,
}

impl RoundEvents {
    pub fn from_commitment(c: &AdversaryCommitment) -> Self {
        let horizon = c.horizon();
        let mut per_round: Vec<Vec<RoundEvent>> = vec![Vec::new(); horizon];
        for tau in 1..=horizon {
            let row = c.row(tau);
            let last = row.last_change_gap();
            for (gap, _) in row.change_points() {
                let t = tau + gap;
                if t > horizon {
                    break;
                }
                per_round[t - 1].push(RoundEvent {
                    origin: tau,
                    final_revision: gap == last,
                });
            }
        }
        // Iterating tau in ascending order pushes each round's events in
        // ascending origin order already.
        Self { per_round }
    }

    pub fn at(&self, t: usize) -> &[RoundEvent] {
        &self.per_round[t - 1]
    }
}

/// Assemble the round-`t` payload for a learner: full vectors under full
/// information, or the played action's scalar under bandit information.
/// `actions` holds the 0-based actions played so far (index `tau - 1`).
pub fn build_round_feedback(
    commitment: &AdversaryCommitment,
    events: &RoundEvents,
    t: usize,
    info: InfoModel,
    actions: &[usize],
) -> Result<RoundFeedback, DomainError> {
    let mut entries = Vec::new();
    for ev in events.at(t) {
        let value = commitment.feedback(t, ev.origin);
        let payload = match info {
            InfoModel::FullInfo => FeedbackValue::Full(LossVector::new(value.to_vec())?),
            InfoModel::Bandit => {
                let action = actions[ev.origin - 1];
                if action >= commitment.k() {
                    return Err(DomainError::ActionOutOfRange {
                        action,
                        k: commitment.k(),
                    });
                }
                FeedbackValue::Played {
                    action,
                    value: value[action],
                }
            }
        };
        entries.push(FeedbackEntry {
            origin: ev.origin,
            value: payload,
            final_revision: ev.final_revision,
        });
    }
    Ok(RoundFeedback { entries })
}
