//! Experiment configuration (JSON).
//!
//! ```json
//! {
//!   "environment": { "kind": "delayed", "K": 2, "T": 10000, "seed": 7,
//!                    "base": { "kind": "gapped", "means": [0.4, 0.6] },
//!                    "delay": 5 },
//!   "learner": { "algo": "ewa", "auto_tune": { "D_bar": 50000.0 } },
//!   "seeds": [1, 2, 3],
//!   "bound_overlay": "cor1",
//!   "strict_gamma": false
//! }
//! ```
//!
//! `seeds` is either an explicit list or `{ "start": 0, "count": 200 }`.
//! The optional top-level `"T"` must agree with the environment's horizon
//! when present.

use serde::{Deserialize, Serialize};

use crate::environments::EnvironmentSpec;
use crate::learners::LearnerConfig;
use crate::types::RngSeed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<RngSeed> {
        match self {
            SeedSpec::List(v) => v.iter().map(|&s| RngSeed(s)).collect(),
            SeedSpec::Range { start, count } => {
                (0..*count).map(|i| RngSeed(start + i)).collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SeedSpec::List(v) => v.len(),
            SeedSpec::Range { count, .. } => *count as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundOverlay {
    Cor1,
    Cor2,
    #[default]
    None,
}

fn default_display_constant() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub learner: LearnerConfig,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub bound_overlay: BoundOverlay,
    /// Abort instead of warn when the bandit admissibility condition fails.
    /// The CLI sets this from `EVOLVE_STRICT_GAMMA=1`.
    #[serde(default)]
    pub strict_gamma: bool,
    /// Display constant for the shape-only second-order overlay.
    #[serde(default = "default_display_constant")]
    pub bound_display_constant: f64,
    /// Optional duplicate of the environment horizon, checked for
    /// consistency when present.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}
