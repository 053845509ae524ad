//! Simplex argmin for the negative-entropy + log-barrier regularizer.
//!
//! Solves `argmin_{p in simplex} p.L + sum_i (p_i/eta - barrier) ln p_i`
//! with `barrier = 1/gamma >= 0`. There is no closed form when
//! `barrier > 0`, so the solver runs nested 1-D root-finding on the
//! stationarity system: for a multiplier `mu`, each coordinate has a unique
//! root of the strictly increasing map
//!
//! `p_i -> L_i + (ln p_i + 1)/eta - barrier/p_i + mu`
//!
//! (inner: safeguarded Newton with bisection fallback), and the total mass
//! `sum_i p_i(mu)` is strictly decreasing in `mu`, so the simplex
//! constraint has a unique outer root (outer: bisection). Both roots are
//! certificate-checkable through [`kkt_residual`].
//!
//! `barrier == 0` is special-cased to the closed-form softmax
//! `p_i ~ exp(-eta L_i)`, numerically stabilized by subtracting the
//! smallest loss (the largest exponent), which also serves the
//! exponential-weights learner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{ActionDistribution, DomainError};

/// Outer bisection iteration cap.
const OUTER_CAP: usize = 200;
/// Inner Newton iteration cap.
const INNER_CAP: usize = 100;
/// Simplex-sum stopping tolerance for the outer root.
const SUM_TOL: f64 = 1e-10;
/// Relative stopping tolerance for the inner root.
const INNER_REL_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone)]
pub enum SolverError {
    #[error("invalid regularizer parameters: {0}")]
    InvalidParams(String),
    #[error("loss entry {value} at index {index} is not finite")]
    BadLoss { index: usize, value: f64 },
    #[error(
        "no convergence after {outer_iterations} outer iterations; |sum p - 1| = {sum_residual:e}"
    )]
    NonConvergence {
        outer_iterations: usize,
        sum_residual: f64,
        /// Best iterate found, for diagnostics.
        best: Vec<f64>,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Regularizer weights: `eta > 0` scales the negative entropy as `1/eta`,
/// `barrier >= 0` is the log-barrier weight (`barrier = 1/gamma`; 0 gives
/// the entropy-only softmax limit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerParams {
    pub eta: f64,
    pub barrier: f64,
}

impl RegularizerParams {
    pub fn new(eta: f64, barrier: f64) -> Result<Self, SolverError> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(SolverError::InvalidParams(format!(
                "eta must be positive and finite, got {eta}"
            )));
        }
        if !(barrier.is_finite() && barrier >= 0.0) {
            return Err(SolverError::InvalidParams(format!(
                "barrier must be nonnegative and finite, got {barrier}"
            )));
        }
        Ok(Self { eta, barrier })
    }

    /// From the `(eta, gamma)` parameterization; `barrier = 1/gamma`.
    pub fn from_gamma(eta: f64, gamma: f64) -> Result<Self, SolverError> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(SolverError::InvalidParams(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Self::new(eta, 1.0 / gamma)
    }

    pub fn entropy_only(eta: f64) -> Result<Self, SolverError> {
        Self::new(eta, 0.0)
    }
}

/// Previous solution, reused to bracket the next solve tightly. Warm
/// starting never changes the stopping tolerances, and results stay
/// bit-reproducible for a given call sequence.
#[derive(Debug, Clone)]
pub struct WarmState {
    mu: f64,
    probs: Vec<f64>,
    /// Adapted to the multiplier's round-to-round movement.
    bracket_scale: f64,
}

/// Stationarity gradient coordinate `L_i + (ln p + 1)/eta - barrier/p`.
#[inline]
fn grad_coord(p: f64, l_i: f64, eta: f64, barrier: f64) -> f64 {
    l_i + (p.ln() + 1.0) / eta - barrier / p
}

#[inline]
fn grad_coord_slope(p: f64, eta: f64, barrier: f64) -> f64 {
    1.0 / (eta * p) + barrier / (p * p)
}

/// Objective value `p.L + sum_i (p_i/eta - barrier) ln p_i`.
pub fn objective(p: &[f64], l: &[f64], params: &RegularizerParams) -> f64 {
    p.iter()
        .zip(l)
        .map(|(&pi, &li)| pi * li + (pi / params.eta - params.barrier) * pi.ln())
        .sum()
}

/// Closed-form softmax `p_i ~ exp(-eta L_i)` (the `barrier = 0` optimum).
/// Entries that underflow are clamped to the smallest positive float so the
/// distribution stays strictly interior.
pub fn softmax(l: &[f64], eta: f64) -> Result<ActionDistribution, SolverError> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(SolverError::InvalidParams(format!(
            "eta must be positive and finite, got {eta}"
        )));
    }
    check_losses(l)?;
    let min = l.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = l.iter().map(|&li| (-eta * (li - min)).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights
        .iter()
        .map(|&w| (w / sum).max(f64::MIN_POSITIVE))
        .collect();
    Ok(ActionDistribution::new(probs)?)
}

fn check_losses(l: &[f64]) -> Result<(), SolverError> {
    if l.is_empty() {
        return Err(SolverError::Domain(DomainError::Empty));
    }
    for (index, &value) in l.iter().enumerate() {
        if !value.is_finite() {
            return Err(SolverError::BadLoss { index, value });
        }
    }
    Ok(())
}

/// Root of `grad_coord(p) + mu = 0` on `(0, 1]`, clamped to 1 when the
/// unconstrained root lies above (which cannot happen at the final
/// multiplier for K >= 2). Safeguarded Newton: the bracket is always valid
/// and bisection takes over whenever a Newton step leaves it. The bracket
/// grows geometrically from `guess`, so a warm guess costs one or two
/// probes.
fn inner_root(l_i: f64, eta: f64, barrier: f64, mu: f64, guess: f64) -> f64 {
    let h = |p: f64| grad_coord(p, l_i, eta, barrier) + mu;
    let guess = guess.clamp(1e-300, 1.0);
    let mut lo;
    let mut hi;
    if h(guess) > 0.0 {
        // Root below the guess.
        hi = guess;
        lo = guess * 0.125;
        while h(lo) > 0.0 {
            hi = lo;
            lo *= 0.125;
            if lo < 1e-300 {
                // h -> -inf as p -> 0; only reachable through underflow.
                return lo;
            }
        }
    } else {
        // Root above the guess.
        lo = guess;
        hi = (guess * 8.0).min(1.0);
        while h(hi) <= 0.0 {
            if hi >= 1.0 {
                return 1.0;
            }
            lo = hi;
            hi = (hi * 8.0).min(1.0);
        }
    }

    let mut p = 0.5 * (lo + hi);
    for _ in 0..INNER_CAP {
        let hv = h(p);
        if hv > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        let newton = p - hv / grad_coord_slope(p, eta, barrier);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - p).abs() <= INNER_REL_TOL * next.max(p) {
            return next;
        }
        p = next;
        if hi - lo <= INNER_REL_TOL * hi {
            break;
        }
    }
    p
}

fn mass_at(
    mu: f64,
    l: &[f64],
    eta: f64,
    barrier: f64,
    guesses: &[f64],
    probs_out: &mut [f64],
) -> f64 {
    let mut sum = 0.0;
    for i in 0..l.len() {
        let p = inner_root(l[i], eta, barrier, mu, guesses[i]);
        probs_out[i] = p;
        sum += p;
    }
    sum
}

/// Solve the simplex argmin. See the module docs for the algorithm; the
/// returned distribution is strictly interior with `|sum p - 1| <= 1e-10`
/// and a stationarity certificate verifiable via [`kkt_residual`].
pub fn solve_argmin(
    l: &[f64],
    params: &RegularizerParams,
) -> Result<ActionDistribution, SolverError> {
    solve_argmin_warm(l, params, None).map(|(d, _)| d)
}

/// [`solve_argmin`] with an optional warm start from the previous round's
/// solution.
pub fn solve_argmin_warm(
    l: &[f64],
    params: &RegularizerParams,
    warm: Option<&WarmState>,
) -> Result<(ActionDistribution, WarmState), SolverError> {
    RegularizerParams::new(params.eta, params.barrier)?;
    check_losses(l)?;
    let k = l.len();
    let eta = params.eta;
    let barrier = params.barrier;

    if k == 1 {
        let dist = ActionDistribution::new(vec![1.0])?;
        let warm = WarmState {
            mu: -grad_coord(1.0, l[0], eta, barrier),
            probs: vec![1.0],
            bracket_scale: 1.0,
        };
        return Ok((dist, warm));
    }

    if barrier == 0.0 {
        let dist = softmax(l, eta)?;
        let mu = -grad_coord(dist.get(0), l[0], eta, 0.0);
        let warm = WarmState {
            mu,
            probs: dist.probs().to_vec(),
            bracket_scale: 1e-3 * (1.0 + mu.abs()),
        };
        return Ok((dist, warm));
    }

    // Symmetric objective: the optimum is exactly uniform.
    if l.iter().all(|&x| x == l[0]) {
        let u = 1.0 / k as f64;
        let dist = ActionDistribution::new(vec![u; k])?;
        let mu = -grad_coord(u, l[0], eta, barrier);
        let warm = WarmState {
            mu,
            probs: vec![u; k],
            bracket_scale: 1e-3 * (1.0 + mu.abs()),
        };
        return Ok((dist, warm));
    }

    // Bracket the multiplier from the gradient evaluated at the uniform
    // point: taking mu = -max_i g_i(1/K) pushes every root to p_i >= 1/K
    // (mass >= 1) and mu = -min_i g_i(1/K) pushes every root below.
    let u = 1.0 / k as f64;
    let g_uniform: Vec<f64> = l
        .iter()
        .map(|&li| grad_coord(u, li, eta, barrier))
        .collect();
    let g_max = g_uniform.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let g_min = g_uniform.iter().cloned().fold(f64::INFINITY, f64::min);
    let cold_lo = -g_max;
    let cold_hi = -g_min;

    let mut guess = vec![u; k];
    let mut probs = vec![0.0; k];
    let mut evals = 0usize;

    let mut mu_lo = cold_lo;
    let mut mu_hi = cold_hi;

    if let Some(w) = warm {
        if w.probs.len() == k {
            guess.copy_from_slice(&w.probs);
            let mut delta = w.bracket_scale.max(1e-9 * (1.0 + w.mu.abs()));
            for _ in 0..6 {
                let lo = w.mu - delta;
                let hi = w.mu + delta;
                if lo <= cold_lo && hi >= cold_hi {
                    break;
                }
                let s_lo = mass_at(lo, l, eta, barrier, &guess, &mut probs);
                let s_hi = mass_at(hi, l, eta, barrier, &guess, &mut probs);
                evals += 2;
                if s_lo >= 1.0 && s_hi <= 1.0 {
                    mu_lo = lo;
                    mu_hi = hi;
                    break;
                }
                delta *= 8.0;
            }
        }
    }

    let mut best_probs = probs.clone();
    let mut best_residual = f64::INFINITY;
    let mut mu = 0.5 * (mu_lo + mu_hi);
    let mut converged = false;
    let mut outer = evals;

    while outer < OUTER_CAP {
        outer += 1;
        mu = 0.5 * (mu_lo + mu_hi);
        let sum = mass_at(mu, l, eta, barrier, &guess, &mut probs);
        guess.copy_from_slice(&probs);
        let residual = (sum - 1.0).abs();
        if residual < best_residual {
            best_residual = residual;
            best_probs.copy_from_slice(&probs);
        }
        if residual <= SUM_TOL {
            converged = true;
            break;
        }
        if sum > 1.0 {
            mu_lo = mu;
        } else {
            mu_hi = mu;
        }
        if mu_hi - mu_lo <= f64::EPSILON * (1.0 + mu.abs()) {
            // Multiplier bracket exhausted at float resolution; accept the
            // best iterate if it meets the distribution tolerance below.
            break;
        }
    }

    if !converged && best_residual > SUM_TOL {
        return Err(SolverError::NonConvergence {
            outer_iterations: outer,
            sum_residual: best_residual,
            best: best_probs,
        });
    }

    let final_probs = if converged { probs } else { best_probs };
    let dist = ActionDistribution::new(final_probs.clone())?;
    let moved = warm
        .map(|w| (mu - w.mu).abs())
        .unwrap_or_else(|| cold_hi - cold_lo);
    let warm_out = WarmState {
        mu,
        probs: final_probs,
        bracket_scale: (4.0 * moved)
            .max((mu_hi - mu_lo) * 8.0)
            .max(1e-9 * (1.0 + mu.abs())),
    };
    Ok((dist, warm_out))
}

/// Normalized stationarity certificate: with
/// `g_i = L_i + (ln p_i + 1)/eta - barrier/p_i` and `gbar = mean(g)`,
/// returns `max_i |g_i - gbar| / (1 + |gbar|)`. Zero at the exact optimum,
/// where all `g_i` coincide (the KKT multiplier is `-gbar`).
pub fn kkt_residual(
    p: &ActionDistribution,
    l: &[f64],
    params: &RegularizerParams,
) -> Result<f64, SolverError> {
    RegularizerParams::new(params.eta, params.barrier)?;
    check_losses(l)?;
    if p.len() != l.len() {
        return Err(SolverError::Domain(DomainError::LengthMismatch {
            expected: l.len(),
            got: p.len(),
        }));
    }
    for (index, &value) in p.probs().iter().enumerate() {
        if value.is_nan() || value <= 0.0 {
            return Err(SolverError::Domain(DomainError::NonPositiveProbability {
                index,
                value,
            }));
        }
    }
    let g: Vec<f64> = p
        .probs()
        .iter()
        .zip(l)
        .map(|(&pi, &li)| grad_coord(pi, li, params.eta, params.barrier))
        .collect();
    let gbar = g.iter().sum::<f64>() / g.len() as f64;
    let max_dev = g
        .iter()
        .map(|gi| (gi - gbar).abs())
        .fold(0.0f64, f64::max);
    Ok(max_dev / (1.0 + gbar.abs()))
}

/// Crude positive lower bound on every optimal coordinate when
/// `barrier > 0`: `barrier / (barrier K + (max L - min L) + 2/eta + 1)`.
pub fn barrier_floor(l: &[f64], params: &RegularizerParams) -> f64 {
    let max = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = l.iter().cloned().fold(f64::INFINITY, f64::min);
    params.barrier
        / (params.barrier * l.len() as f64 + (max - min) + 2.0 / params.eta + 1.0)
}
