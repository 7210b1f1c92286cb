//! Estimation of `Tr(Mρ^k)` for an observable `M`.
//!
//! At the spectral level an observable enters only through its diagonal in
//! the eigenbasis of `ρ`: `Tr(Mρ^k) = Σ_i m_i p_i^k` with `m_i = ⟨ψ_i|M|ψ_i⟩`.
//! The mixed seeds `Tr(Mρ^i), i ≤ t` come from an exact oracle with optional
//! injected noise; the symmetric polynomials come from the plain moments.

use rand::Rng;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::estimation::{capped_floor, moment_rng};
use crate::fraction::{serde_rational, serde_rational_vec};
use crate::series::{extend_series, newton_girard, power_sums};
use crate::{Error, PowerSumSeries, Result, SeriesKind, Spectrum, SymmetricPolys};

/// Diagonal of an observable in the eigenbasis of the companion spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableWeights {
    #[serde(with = "serde_rational_vec")]
    weights: Vec<Rational>,
    #[serde(with = "serde_rational")]
    inf_norm: Rational,
}

impl ObservableWeights {
    pub fn new(weights: Vec<Rational>, inf_norm: Rational) -> Result<Self> {
        if inf_norm <= 0 {
            return Err(Error::InvalidArgument("inf_norm must be positive".into()));
        }
        if let Some(m) = weights.iter().find(|m| Rational::from(m.abs_ref()) > inf_norm) {
            return Err(Error::InvalidArgument(format!("|{m}| exceeds inf_norm {inf_norm}")));
        }
        Ok(ObservableWeights { weights, inf_norm })
    }

    /// Uses `max |m_i|` as the norm bound (1 for the zero observable).
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let norm = weights
            .iter()
            .map(|m| Rational::from(m.abs_ref()))
            .max()
            .filter(|n| *n > 0)
            .unwrap_or_else(|| Rational::from(1));
        ObservableWeights::new(weights, norm)
    }

    pub fn identity(rank: usize) -> Self {
        ObservableWeights { weights: vec![Rational::from(1); rank], inf_norm: Rational::from(1) }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn inf_norm(&self) -> &Rational {
        &self.inf_norm
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A spectrum and its observable weights, stored together on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedSpectrum {
    pub spectrum: Spectrum,
    pub observable: ObservableWeights,
}

fn check_lengths(s: &Spectrum, w: &ObservableWeights) -> Result<()> {
    if s.rank() != w.len() {
        return Err(Error::LengthMismatch { expected: s.rank(), actual: w.len() });
    }
    Ok(())
}

/// `P_{i,M} = Σ_j m_j p_j^i` for `i = 1..=t`.
pub fn observable_power_sums(s: &Spectrum, w: &ObservableWeights, t: usize) -> Result<PowerSumSeries> {
    check_lengths(s, w)?;
    let mut powers: Vec<Rational> = s.eigenvalues().to_vec();
    let mut values = Vec::with_capacity(t);
    for i in 1..=t {
        if i > 1 {
            for (pw, p) in powers.iter_mut().zip(s.eigenvalues()) {
                *pw *= p;
            }
        }
        values.push(
            powers
                .iter()
                .zip(w.weights())
                .map(|(pw, m)| Rational::from(pw * m))
                .sum(),
        );
    }
    Ok(PowerSumSeries::new(SeriesKind::Exact, values))
}

/// `min{r, ⌊ln(2k‖M‖∞/ε)⌋}`, at least 1.
pub fn effective_rank_observable(k: usize, epsilon: f64, inf_norm: f64, r: Option<usize>) -> usize {
    capped_floor((2.0 * k as f64 * inf_norm / epsilon).ln(), r)
}

/// Error model for the oracle moments fed into [`run_algorithm2`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentNoise {
    None,
    /// Explicit additive offsets for `Tr(ρ^i)` and `Tr(Mρ^i)`, `i = 1..=t`.
    Offsets {
        #[serde(with = "serde_rational_vec")]
        plain: Vec<Rational>,
        #[serde(with = "serde_rational_vec")]
        mixed: Vec<Rational>,
    },
    /// Offsets of magnitude exactly `bound·(1 − 2⁻²⁰)` with seeded random
    /// signs. Plain moments keep their value inside `[0, 1]`.
    ThresholdSigns {
        plain_bound: f64,
        mixed_bound: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableConfig {
    pub k: usize,
    pub t: usize,
    pub noise: MomentNoise,
}

/// Output of [`run_algorithm2`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableEstimate {
    /// `Q_{1,M}..Q_{k,M}`.
    pub series: PowerSumSeries,
    pub b: SymmetricPolys,
}

/// Injects the configured noise into exact plain and mixed moments.
pub(crate) fn apply_noise(
    plain: &mut [Rational],
    mixed: &mut [Rational],
    noise: &MomentNoise,
) -> Result<()> {
    match noise {
        MomentNoise::None => {}
        MomentNoise::Offsets { plain: dp, mixed: dm } => {
            if dp.len() < plain.len() || dm.len() < mixed.len() {
                return Err(Error::SeriesTooShort {
                    needed: plain.len().max(mixed.len()),
                    available: dp.len().min(dm.len()),
                });
            }
            plain.iter_mut().zip(dp).for_each(|(v, d)| *v += d);
            mixed.iter_mut().zip(dm).for_each(|(v, d)| *v += d);
        }
        MomentNoise::ThresholdSigns { plain_bound, mixed_bound, seed } => {
            let mut rng = moment_rng(*seed, u64::MAX);
            let shrink = 1.0 - 2f64.powi(-20);
            let p = exact_offset(plain_bound * shrink)?;
            let m = exact_offset(mixed_bound * shrink)?;
            for v in plain.iter_mut() {
                let up = Rational::from(&*v + &p);
                let down = Rational::from(&*v - &p);
                let up_ok = up <= 1;
                let down_ok = down >= 0;
                *v = match (up_ok, down_ok) {
                    (true, true) if rng.random_bool(0.5) => up,
                    (true, true) => down,
                    (true, false) => up,
                    (false, true) => down,
                    (false, false) => v.clone(),
                };
            }
            for v in mixed.iter_mut() {
                if rng.random_bool(0.5) {
                    *v += &m;
                } else {
                    *v -= &m;
                }
            }
        }
    }
    Ok(())
}

fn exact_offset(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| Error::InvalidArgument(format!("noise bound {x} is not finite")))
}

/// Extends noisy mixed seeds with the `b_k` of noisy plain moments.
pub fn estimate_observable_from_moments(
    plain: &[Rational],
    mixed: &[Rational],
    k: usize,
) -> Result<ObservableEstimate> {
    let t = plain.len().min(k);
    if mixed.len() < t {
        return Err(Error::SeriesTooShort { needed: t, available: mixed.len() });
    }
    let b = newton_girard(plain, t)?;
    let series = extend_series(&b, &mixed[..t], k)?.with_kind(SeriesKind::Estimated);
    Ok(ObservableEstimate { series, b })
}

/// Estimates `Tr(Mρ^i)` for `i = 1..=k` from `t` plain and `t` mixed moments.
pub fn run_algorithm2(s: &Spectrum, w: &ObservableWeights, config: &ObservableConfig) -> Result<ObservableEstimate> {
    check_lengths(s, w)?;
    if config.k == 0 || config.t == 0 {
        return Err(Error::InvalidArgument("k and t must be positive".into()));
    }
    let t = config.t.min(config.k);
    let mut plain = power_sums(s, t).into_values();
    let mut mixed = observable_power_sums(s, w, t)?.into_values();
    apply_noise(&mut plain, &mut mixed, &config.noise)?;
    estimate_observable_from_moments(&plain, &mixed, config.k)
}
