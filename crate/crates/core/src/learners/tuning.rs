//! Closed-form learning-rate rules and the regret values they guarantee.

use crate::types::EvolutionHorizon;

/// The multiplier threshold in the bandit tuning admissibility condition:
/// `1/sqrt(gamma) >= 128 (1 + d_max)`.
pub const GAMMA_CONDITION_CONSTANT: f64 = 128.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwaTuning {
    pub eta: f64,
    /// Exact regret guarantee at this rate:
    /// `sqrt(4 ln K (T/2 + 2 D_bar))`.
    pub regret_bound: f64,
}

/// Full-information rate from a known upper bound `d_bar` on the total
/// feedback inaccuracy: `eta = sqrt(ln K / (T/2 + 2 d_bar))`.
pub fn tune_ewa(k: usize, horizon: usize, d_bar: f64) -> EwaTuning {
    assert!(k >= 2, "tuning requires at least two actions");
    assert!(d_bar >= 0.0 && d_bar.is_finite());
    let ln_k = (k as f64).ln();
    let denom = horizon as f64 / 2.0 + 2.0 * d_bar;
    EwaTuning {
        eta: (ln_k / denom).sqrt(),
        regret_bound: (4.0 * ln_k * denom).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtrlTuning {
    pub eta: f64,
    pub gamma: f64,
    /// Whether `1/sqrt(gamma) >= 128 (1 + d_max)` holds. The constant is an
    /// analysis artifact and very stringent at desk scale; callers decide
    /// whether to warn or abort when it fails.
    pub condition_ok: bool,
    /// Shape of the guaranteed regret, constants hidden:
    /// `sqrt(K T + lambda_bar)`.
    pub regret_shape: f64,
}

/// Bandit rates from a known upper bound `lambda_bar` on the summed
/// per-round inaccuracy: `eta = 1/sqrt(K T + lambda_bar)`, `gamma = eta K`.
pub fn tune_ftrl(
    k: usize,
    horizon: usize,
    lambda_bar: f64,
    d_max: EvolutionHorizon,
) -> FtrlTuning {
    assert!(k >= 2, "tuning requires at least two actions");
    assert!(horizon >= 1);
    assert!(lambda_bar >= 0.0 && lambda_bar.is_finite());
    let mass = k as f64 * horizon as f64 + lambda_bar;
    let eta = 1.0 / mass.sqrt();
    let gamma = eta * k as f64;
    let condition_ok = match d_max {
        EvolutionHorizon::Bounded(d) => {
            1.0 / gamma.sqrt() >= GAMMA_CONDITION_CONSTANT * (1.0 + d as f64)
        }
        EvolutionHorizon::Unbounded => false,
    };
    FtrlTuning {
        eta,
        gamma,
        condition_ok,
        regret_shape: mass.sqrt(),
    }
}
