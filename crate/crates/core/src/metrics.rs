//! Feedback-accuracy quantities, computed from an adversary commitment
//! alone. Nothing here depends on agent actions.
//!
//! Two aggregates coexist by design and are both reported: `D` (sup-norm
//! gap between the revised and true cumulative losses, the full-information
//! tuning quantity) and the per-round inaccuracy schedule `lambda_t` whose
//! sum is the bandit tuning quantity; `Lambda` is the clipped per-pair
//! aggregate. They are related only up to constants, so nothing is guessed:
//! callers pick the quantity their tuning rule names.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{AdversaryCommitment, DomainError, EvolutionHorizon, LossVector};

fn sup_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Inaccuracy coefficient `r / (1 + r)` with `r` the Euclidean gap between
/// a feedback revision and the truth. Lies in [0, 1); zero iff the vectors
/// are equal.
pub fn lambda_coeff(truth: &LossVector, observed: &LossVector) -> Result<f64, DomainError> {
    if truth.len() != observed.len() {
        return Err(DomainError::LengthMismatch {
            expected: truth.len(),
            got: observed.len(),
        });
    }
    let r = l2_diff(truth.values(), observed.values());
    Ok(r / (1.0 + r))
}

/// Walks revision rounds `r = 1..=T`, maintaining the frozen prefix of the
/// revised cumulative sum and handing the live window to a fold.
struct RevisionWalker<'a> {
    c: &'a AdversaryCommitment,
    /// Origins `1..=retired` are frozen as of the current revision round.
    retired: usize,
}

impl<'a> RevisionWalker<'a> {
    fn new(c: &'a AdversaryCommitment) -> Self {
        Self { c, retired: 0 }
    }

    /// Advance to revision round `r`, feeding newly frozen origins to
    /// `on_retire`.
    fn advance<F: FnMut(usize, &[f64])>(&mut self, r: usize, mut on_retire: F) {
        while self.retired < r {
            let tau = self.retired + 1;
            let row = self.c.row(tau);
            if tau + row.last_change_gap() <= r {
                on_retire(tau, self.c.feedback(r, tau));
                self.retired = tau;
            } else {
                break;
            }
        }
    }

    /// Apply `on_live` to every still-mutable origin as of round `r`.
    fn for_live<F: FnMut(usize, &[f64])>(&self, r: usize, mut on_live: F) {
        for tau in self.retired + 1..=r {
            on_live(tau, self.c.feedback(r, tau));
        }
    }
}

/// Per-round contributions `||L^e_t - L_t||_inf` for `t = 1..=T`, where
/// `L^e_t` sums the revisions as of round `t - 1` and `L_t` the true
/// losses. Index `t - 1`; the first entry is always zero.
pub fn d_contributions(c: &AdversaryCommitment) -> Vec<f64> {
    let k = c.k();
    let horizon = c.horizon();
    let mut out = Vec::with_capacity(horizon);
    let mut frozen_e = vec![0.0; k];
    let mut true_cum = vec![0.0; k];
    let mut walker = RevisionWalker::new(c);
    let mut live_sum = vec![0.0; k];
    for t in 1..=horizon {
        if t == 1 {
            out.push(0.0);
            continue;
        }
        let r = t - 1;
        walker.advance(r, |_tau, v| {
            for (f, x) in frozen_e.iter_mut().zip(v) {
                *f += *x;
            }
        });
        live_sum.copy_from_slice(&frozen_e);
        walker.for_live(r, |_tau, v| {
            for (f, x) in live_sum.iter_mut().zip(v) {
                *f += *x;
            }
        });
        for (cum, x) in true_cum.iter_mut().zip(c.true_loss(t - 1)) {
            *cum += *x;
        }
        out.push(sup_norm_diff(&live_sum, &true_cum));
    }
    out
}

/// Total feedback inaccuracy `D = sum_t ||L^e_t - L_t||_inf`.
pub fn inaccuracy_d(c: &AdversaryCommitment) -> f64 {
    d_contributions(c).iter().sum()
}

/// Cumulative `D` by round, for bound overlays.
pub fn d_partials(c: &AdversaryCommitment) -> Vec<f64> {
    let mut cum = 0.0;
    d_contributions(c)
        .into_iter()
        .map(|x| {
            cum += x;
            cum
        })
        .collect()
}

/// Per-round inaccuracy `lambda_t = sum_{tau < t} coeff(l_tau, fb(t-1, tau))`
/// for `t = 1..=T` (index `t - 1`; the first entry is zero).
pub fn lambda_schedule(c: &AdversaryCommitment) -> Vec<f64> {
    let horizon = c.horizon();
    let mut out = Vec::with_capacity(horizon);
    let mut frozen_coeff = 0.0;
    let mut walker = RevisionWalker::new(c);
    for t in 1..=horizon {
        if t == 1 {
            out.push(0.0);
            continue;
        }
        let r = t - 1;
        walker.advance(r, |tau, v| {
            let d = l2_diff(c.true_loss(tau), v);
            frozen_coeff += d / (1.0 + d);
        });
        let mut live = 0.0;
        walker.for_live(r, |tau, v| {
            let d = l2_diff(c.true_loss(tau), v);
            live += d / (1.0 + d);
        });
        out.push(frozen_coeff + live);
    }
    out
}

/// Running sums of the schedule, `sum_{s <= t} lambda_s`, for overlays.
pub fn lambda_partials(c: &AdversaryCommitment) -> Vec<f64> {
    let mut cum = 0.0;
    lambda_schedule(c)
        .into_iter()
        .map(|x| {
            cum += x;
            cum
        })
        .collect()
}

/// Clipped aggregate `Lambda = sum_t sum_{tau <= t} min(1, ||l_tau -
/// fb(t, tau)||_2)`, indexed by revisions *at* `t`.
pub fn lambda_total(c: &AdversaryCommitment) -> f64 {
    let horizon = c.horizon();
    let mut total = 0.0;
    let mut frozen = 0.0;
    let mut walker = RevisionWalker::new(c);
    for t in 1..=horizon {
        walker.advance(t, |tau, v| {
            frozen += l2_diff(c.true_loss(tau), v).min(1.0);
        });
        let mut live = 0.0;
        walker.for_live(t, |tau, v| {
            live += l2_diff(c.true_loss(tau), v).min(1.0);
        });
        total += frozen + live;
    }
    total
}

/// Corruption budget `C = sum_t ||l_t - corrupted_t||_inf` between two loss
/// sequences of equal horizon.
pub fn corruption_budget(
    truth: &[LossVector],
    corrupted: &[LossVector],
) -> Result<f64, DomainError> {
    if truth.len() != corrupted.len() {
        return Err(DomainError::LengthMismatch {
            expected: truth.len(),
            got: corrupted.len(),
        });
    }
    let mut total = 0.0;
    for (a, b) in truth.iter().zip(corrupted) {
        if a.len() != b.len() {
            return Err(DomainError::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        total += sup_norm_diff(a.values(), b.values());
    }
    Ok(total)
}

/// Sup-norm gap between the truth and the *immediate* observation,
/// `sum_t ||l_t - fb(t, t)||_inf`. For the corrupted construction this is
/// exactly the corruption budget.
pub fn instant_corruption(c: &AdversaryCommitment) -> f64 {
    (1..=c.horizon())
        .map(|t| sup_norm_diff(c.true_loss(t), c.feedback(t, t)))
        .sum()
}

/// Every accuracy quantity at once, including the sparse coefficient map.
/// Cost grows with the number of inaccurate `(t, tau)` pairs; meant for
/// small commitments and tests. Use [`accuracy_summary`] at scale.
#[derive(Debug, Clone)]
pub struct AccuracyReport {
    pub d_total: f64,
    pub lambda: f64,
    /// `lambda_t` for `t = 1..=T`, index `t - 1`.
    pub lambda_schedule: Vec<f64>,
    /// Nonzero coefficients only, keyed by `(revision round, origin)`.
    pub lambda_coeffs: BTreeMap<(usize, usize), f64>,
    pub d_max_observed: usize,
    pub corruption_budget: f64,
}

pub fn accuracy_report(c: &AdversaryCommitment) -> AccuracyReport {
    let mut coeffs = BTreeMap::new();
    for t in 1..=c.horizon() {
        for tau in 1..=t {
            let d = l2_diff(c.true_loss(tau), c.feedback(t, tau));
            if d > 0.0 {
                coeffs.insert((t, tau), d / (1.0 + d));
            }
        }
    }
    AccuracyReport {
        d_total: inaccuracy_d(c),
        lambda: lambda_total(c),
        lambda_schedule: lambda_schedule(c),
        lambda_coeffs: coeffs,
        d_max_observed: c.observed_horizon(),
        corruption_budget: instant_corruption(c),
    }
}

/// Scalable accuracy summary. Serializes with the exact field names
/// `D`, `Lambda`, `lambda_sum`, `d_max`, `corruption_budget`; an unbounded
/// evolution horizon serializes as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub lambda_sum: f64,
    pub d_max: Option<usize>,
    pub corruption_budget: f64,
}

pub fn accuracy_summary(c: &AdversaryCommitment) -> AccuracySummary {
    AccuracySummary {
        d: inaccuracy_d(c),
        lambda: lambda_total(c),
        lambda_sum: lambda_schedule(c).iter().sum(),
        d_max: match c.declared_horizon() {
            EvolutionHorizon::Bounded(d) => Some(d),
            EvolutionHorizon::Unbounded => None,
        },
        corruption_budget: instant_corruption(c),
    }
}
