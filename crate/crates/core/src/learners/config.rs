//! Learner configuration block (JSON) and construction.
//!
//! Schema:
//!
//! ```json
//! { "algo": "ewa" | "ftrl" | "skip",
//!   "eta": 0.05,
//!   "gamma": 0.01,
//!   "d_max": 3,
//!   "inner": { ... nested learner config ... },
//!   "auto_tune": { "D_bar": 120.0 } | { "Lambda_bar": 0.0 } | null }
//! ```
//!
//! `eta`/`auto_tune.D_bar` configure `ewa`; `eta`+optional `gamma` (or
//! `auto_tune.Lambda_bar`) configure `ftrl`; `d_max`+`inner` configure the
//! `skip` wrapper. Omitting `gamma` on an explicit `ftrl` config disables
//! the log barrier (entropy-only limit).

use serde::{Deserialize, Serialize};

use crate::solver::RegularizerParams;
use crate::types::EvolutionHorizon;

use super::ewa::EvolvingEwa;
use super::ftrl::EvolvingFtrl;
use super::interface::{Learner, LearnerError};
use super::skip::SkippingWrapper;
use super::tuning::{tune_ewa, tune_ftrl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerAlgo {
    Ewa,
    Ftrl,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoTune {
    DBar {
        #[serde(rename = "D_bar")]
        d_bar: f64,
    },
    LambdaBar {
        #[serde(rename = "Lambda_bar")]
        lambda_bar: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algo: LearnerAlgo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<LearnerConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_tune: Option<AutoTune>,
}

impl LearnerConfig {
    pub fn ewa(eta: f64) -> Self {
        Self {
            algo: LearnerAlgo::Ewa,
            eta: Some(eta),
            gamma: None,
            d_max: None,
            inner: None,
            auto_tune: None,
        }
    }

    pub fn ewa_auto(d_bar: f64) -> Self {
        Self {
            algo: LearnerAlgo::Ewa,
            eta: None,
            gamma: None,
            d_max: None,
            inner: None,
            auto_tune: Some(AutoTune::DBar { d_bar }),
        }
    }

    pub fn ftrl(eta: f64, gamma: Option<f64>) -> Self {
        Self {
            algo: LearnerAlgo::Ftrl,
            eta: Some(eta),
            gamma,
            d_max: None,
            inner: None,
            auto_tune: None,
        }
    }

    pub fn ftrl_auto(lambda_bar: f64) -> Self {
        Self {
            algo: LearnerAlgo::Ftrl,
            eta: None,
            gamma: None,
            d_max: None,
            inner: None,
            auto_tune: Some(AutoTune::LambdaBar { lambda_bar }),
        }
    }

    pub fn skip(d_max: usize, inner: LearnerConfig) -> Self {
        Self {
            algo: LearnerAlgo::Skip,
            eta: None,
            gamma: None,
            d_max: Some(d_max),
            inner: Some(Box::new(inner)),
            auto_tune: None,
        }
    }
}

/// A constructed learner plus everything the harness needs to report on it.
pub struct BuiltLearner {
    pub learner: Box<dyn Learner>,
    /// Resolved `(eta, gamma)` of the innermost weight-update rule.
    pub eta: f64,
    pub gamma: Option<f64>,
    /// Outcome of the bandit admissibility condition, when it applies.
    pub condition_ok: Option<bool>,
    pub notes: Vec<String>,
}

impl LearnerConfig {
    /// Build the learner for an environment with `k` actions, horizon
    /// `horizon` and evolution horizon `d_max` (a skip wrapper replaces
    /// `d_max` with its own for the inner learner).
    pub fn build(
        &self,
        k: usize,
        horizon: usize,
        d_max: EvolutionHorizon,
    ) -> Result<BuiltLearner, LearnerError> {
        match self.algo {
            LearnerAlgo::Ewa => {
                let eta = match (self.eta, self.auto_tune) {
                    (Some(eta), None) => eta,
                    (None, Some(AutoTune::DBar { d_bar })) => {
                        if k < 2 {
                            return Err(LearnerError::Config(
                                "auto-tuning needs at least two actions".into(),
                            ));
                        }
                        tune_ewa(k, horizon, d_bar).eta
                    }
                    (None, Some(AutoTune::LambdaBar { .. })) => {
                        return Err(LearnerError::Config(
                            "ewa auto-tuning takes D_bar, not Lambda_bar".into(),
                        ))
                    }
                    (Some(_), Some(_)) => {
                        return Err(LearnerError::Config(
                            "give either eta or auto_tune, not both".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(LearnerError::Config(
                            "ewa needs eta or auto_tune.D_bar".into(),
                        ))
                    }
                };
                Ok(BuiltLearner {
                    learner: Box::new(EvolvingEwa::new(k, eta)?),
                    eta,
                    gamma: None,
                    condition_ok: None,
                    notes: Vec::new(),
                })
            }
            LearnerAlgo::Ftrl => {
                let mut notes = Vec::new();
                let (eta, gamma, condition_ok) = match (self.eta, self.auto_tune) {
                    (None, Some(AutoTune::LambdaBar { lambda_bar })) => {
                        if k < 2 {
                            return Err(LearnerError::Config(
                                "auto-tuning needs at least two actions".into(),
                            ));
                        }
                        let t = tune_ftrl(k, horizon, lambda_bar, d_max);
                        (t.eta, Some(t.gamma), Some(t.condition_ok))
                    }
                    (None, Some(AutoTune::DBar { .. })) => {
                        return Err(LearnerError::Config(
                            "ftrl auto-tuning takes Lambda_bar, not D_bar".into(),
                        ))
                    }
                    (Some(eta), None) => {
                        let ok = self.gamma.map(|g| {
                            match d_max {
                                EvolutionHorizon::Bounded(d) => {
                                    1.0 / g.sqrt() >= 128.0 * (1.0 + d as f64)
                                }
                                EvolutionHorizon::Unbounded => false,
                            }
                        });
                        (eta, self.gamma, ok)
                    }
                    (Some(_), Some(_)) => {
                        return Err(LearnerError::Config(
                            "give either eta/gamma or auto_tune, not both".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(LearnerError::Config(
                            "ftrl needs eta or auto_tune.Lambda_bar".into(),
                        ))
                    }
                };
                if condition_ok == Some(false) {
                    notes.push(format!(
                        "gamma admissibility violated: 1/sqrt(gamma) = {:.4} < 128 (1 + d_max = {})",
                        1.0 / gamma.unwrap_or(f64::INFINITY).sqrt(),
                        d_max,
                    ));
                }
                let params = match gamma {
                    Some(g) => RegularizerParams::from_gamma(eta, g)?,
                    None => RegularizerParams::entropy_only(eta)?,
                };
                Ok(BuiltLearner {
                    learner: Box::new(EvolvingFtrl::new(k, params)?),
                    eta,
                    gamma,
                    condition_ok,
                    notes,
                })
            }
            LearnerAlgo::Skip => {
                let d = self.d_max.ok_or_else(|| {
                    LearnerError::Config("skip needs d_max".into())
                })?;
                let inner_cfg = self.inner.as_ref().ok_or_else(|| {
                    LearnerError::Config("skip needs an inner learner".into())
                })?;
                // The inner learner's view freezes at the wrapper's horizon.
                let inner = inner_cfg.build(k, horizon, EvolutionHorizon::Bounded(d))?;
                Ok(BuiltLearner {
                    learner: Box::new(SkippingWrapper::new(inner.learner, d)),
                    eta: inner.eta,
                    gamma: inner.gamma,
                    condition_ok: inner.condition_ok,
                    notes: inner.notes,
                })
            }
        }
    }
}
