//! Closed-form error bounds and empirical checkers.
//!
//! Rational-valued bounds are exact; the per-moment thresholds contain
//! `ln t` and are returned as floats.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Outcome of comparing an empirical error against a theoretical bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub empirical: f64,
    pub theoretical: f64,
    /// `empirical <= theoretical`, decided in exact arithmetic.
    pub satisfied: bool,
    pub context: String,
}

/// `Σ_{j=1..k} |ε_j| / j`, the bound on `|b_k − a_k|` for `k = eps.len()`.
pub fn lemma1_bound(eps: &[Rational]) -> Rational {
    eps.iter()
        .enumerate()
        .map(|(j, e)| Rational::from(e.abs_ref()) / (j as u32 + 1))
        .sum()
}

/// `(k / t!) (1 − t/r)`, the truncation error of a rank-`t` recurrence.
pub fn lemma2_bound(k: usize, t: usize, r: usize) -> Result<Rational> {
    if t == 0 || r == 0 || t > r {
        return Err(Error::InvalidArgument(format!("lemma 2 needs 1 <= t <= r, got t={t}, r={r}")));
    }
    let fact = Integer::from(Integer::factorial(t as u32));
    let shortfall = Rational::from((r - t, r));
    Ok(Rational::from((Integer::from(k), fact)) * shortfall)
}

/// `C(r, t) / r^t`, the maximum of the `t`-th elementary symmetric polynomial
/// over probability vectors of length `r`.
pub fn esp_max_bound(t: usize, r: usize) -> Result<Rational> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let binom = Integer::from(Integer::binomial_u(r as u32, t as u32));
    let denom = Integer::from(Integer::u_pow_u(r as u32, t as u32));
    Ok(Rational::from((binom, denom)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// `ε / (k t ln t)`: exact rank, `t = r`.
    Rank,
    /// `ε / (2 k t ln t)`: effective rank.
    Effective,
    /// `ε / (c ‖M‖ k t ln t)` for an observable of norm `inf_norm`, with
    /// `c = 2` as stated for the observable theorem.
    Observable { inf_norm: f64 },
    /// Same with the constant `c = 4` used in its proof; the stricter of the two.
    ObservableStrict { inf_norm: f64 },
}

/// `ln t`, replaced by 1 when `t <= 1`.
pub fn guarded_ln(t: usize) -> f64 {
    if t <= 1 {
        1.0
    } else {
        (t as f64).ln()
    }
}

/// Per-moment error budget for the oracle moments.
pub fn theorem_threshold(k: usize, t: usize, epsilon: f64, variant: ThresholdVariant) -> f64 {
    let base = k as f64 * t as f64 * guarded_ln(t);
    let scale = match variant {
        ThresholdVariant::Rank => 1.0,
        ThresholdVariant::Effective => 2.0,
        ThresholdVariant::Observable { inf_norm } => 2.0 * inf_norm,
        ThresholdVariant::ObservableStrict { inf_norm } => 4.0 * inf_norm,
    };
    epsilon / (scale * base)
}

/// Compares `max_{i ∈ range} |exact_i − estimated_i|` (one-based indices)
/// against `bound`.
pub fn check_series(
    exact: &[Rational],
    estimated: &[Rational],
    bound: &Rational,
    range: std::ops::RangeInclusive<usize>,
    context: impl Into<String>,
) -> Result<BoundReport> {
    let end = *range.end();
    let available = exact.len().min(estimated.len());
    if end > available {
        return Err(Error::SeriesTooShort { needed: end, available });
    }
    let worst = range
        .filter(|&i| i >= 1)
        .map(|i| Rational::from(&exact[i - 1] - &estimated[i - 1]).abs())
        .max()
        .unwrap_or_default();
    Ok(BoundReport {
        empirical: crate::fraction::to_f64(&worst),
        theoretical: crate::fraction::to_f64(bound),
        satisfied: worst <= *bound,
        context: context.into(),
    })
}
