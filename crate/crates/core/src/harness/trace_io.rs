//! Trace files (JSON), for replay and offline validation.
//!
//! Schema (1-based rounds and actions):
//!
//! ```json
//! { "K": 2, "T": 3, "d_max": 1,
//!   "actions": [1, 2, 1],
//!   "probs": [[0.5, 0.5], ...],
//!   "true": [[0.2, 0.7], ...],
//!   "feedback": [ { "t": 1, "tau": 1, "loss": [0.0, 0.0] }, ... ] }
//! ```
//!
//! `feedback` lists the stored change points; pairs between change points
//! keep the latest revision, like the scripted-environment schema.
//! Loading skips value validation so that `validate --trace` can report
//! violations in the data instead of refusing to read it.

use serde::{Deserialize, Serialize};

use crate::environments::ScriptEntry;
use crate::types::{
    ActionDistribution, CommitmentBuilder, EvolutionHorizon, RunTrace,
};

use super::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceFile {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    /// Declared evolution horizon; `null` means unbounded.
    pub d_max: Option<usize>,
    /// 1-based actions, one per round.
    pub actions: Vec<usize>,
    pub probs: Vec<Vec<f64>>,
    #[serde(rename = "true")]
    pub true_losses: Vec<Vec<f64>>,
    pub feedback: Vec<ScriptEntry>,
}

pub fn trace_to_file(trace: &RunTrace, d_max: EvolutionHorizon) -> TraceFile {
    let c = &trace.commitment;
    let mut feedback = Vec::new();
    for tau in 1..=c.horizon() {
        for (gap, value) in c.row(tau).change_points() {
            feedback.push(ScriptEntry {
                t: tau + gap,
                tau,
                loss: value.to_vec(),
            });
        }
    }
    TraceFile {
        k: c.k(),
        t: c.horizon(),
        d_max: d_max.bounded(),
        actions: trace.actions.iter().map(|&a| a + 1).collect(),
        probs: trace
            .sampling_probs
            .iter()
            .map(|p| p.probs().to_vec())
            .collect(),
        true_losses: (1..=c.horizon()).map(|t| c.true_loss(t).to_vec()).collect(),
        feedback,
    }
}

pub fn trace_from_file(file: &TraceFile) -> Result<(RunTrace, EvolutionHorizon), HarnessError> {
    if file.k == 0 || file.t == 0 {
        return Err(HarnessError::Config(
            "trace needs at least one action and one round".into(),
        ));
    }
    if file.actions.len() != file.t
        || file.probs.len() != file.t
        || file.true_losses.len() != file.t
    {
        return Err(HarnessError::Config(format!(
            "trace tables must all have T = {} rows",
            file.t
        )));
    }
    let mut builder = CommitmentBuilder::new(file.k, file.t);
    for (i, row) in file.true_losses.iter().enumerate() {
        if row.len() != file.k {
            return Err(HarnessError::Config(format!(
                "true-loss row {} has {} entries, expected {}",
                i + 1,
                row.len(),
                file.k
            )));
        }
        builder.set_true_loss(i + 1, row);
    }
    let mut entries: Vec<&ScriptEntry> = file.feedback.iter().collect();
    entries.sort_by_key(|e| (e.tau, e.t));
    for w in entries.windows(2) {
        if w[0].tau == w[1].tau && w[0].t == w[1].t {
            return Err(HarnessError::Config(format!(
                "duplicate feedback entry for (t={}, tau={})",
                w[0].t, w[0].tau
            )));
        }
    }
    let mut seen_initial = vec![false; file.t];
    for e in &entries {
        if e.tau == 0 || e.t < e.tau || e.t > file.t {
            return Err(HarnessError::Config(format!(
                "feedback entry (t={}, tau={}) out of range",
                e.t, e.tau
            )));
        }
        if e.loss.len() != file.k {
            return Err(HarnessError::Config(format!(
                "feedback entry (t={}, tau={}) has {} values, expected {}",
                e.t,
                e.tau,
                e.loss.len(),
                file.k
            )));
        }
        if e.t > e.tau && !seen_initial[e.tau - 1] {
            builder.push_revision(e.tau, 0, &vec![0.0; file.k]);
            seen_initial[e.tau - 1] = true;
        }
        builder.push_revision(e.tau, e.t - e.tau, &e.loss);
        seen_initial[e.tau - 1] = true;
    }
    for tau in 1..=file.t {
        if !seen_initial[tau - 1] {
            builder.push_revision(tau, 0, &vec![0.0; file.k]);
        }
    }
    let d_max = match file.d_max {
        Some(d) => EvolutionHorizon::Bounded(d),
        None => EvolutionHorizon::Unbounded,
    };
    let commitment = builder.finish(d_max);
    let mut actions = Vec::with_capacity(file.t);
    for (i, &a) in file.actions.iter().enumerate() {
        if a == 0 {
            return Err(HarnessError::Config(format!(
                "action at round {} is 0; actions are 1-based",
                i + 1
            )));
        }
        actions.push(a - 1);
    }
    let trace = RunTrace {
        commitment: std::sync::Arc::new(commitment),
        actions,
        sampling_probs: file
            .probs
            .iter()
            .map(|p| ActionDistribution::from_raw(p.clone()))
            .collect(),
    };
    Ok((trace, d_max))
}
