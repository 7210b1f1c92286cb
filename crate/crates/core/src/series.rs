//! Power sums, the Newton-Girard identities, and recurrence extension.
//!
//! For eigenvalues `p_1..p_r` the power sums `P_i = Σ p_j^i` and the
//! elementary symmetric polynomials `a_k` are linked by
//!
//! ```text
//! a_k = (1/k) Σ_{i=1..k} (-1)^{i-1} a_{k-i} P_i,        a_0 = 1
//! ```
//!
//! and, because every `p_j` is a root of `Π (x - p_m)`, the power sums satisfy
//! the order-`r` linear recurrence
//!
//! ```text
//! P_ℓ = Σ_{k=1..r} (-1)^{k-1} a_k P_{ℓ-k}.
//! ```
//!
//! [`extend_series`] runs that recurrence from any seed and any coefficient
//! vector, so the same routine serves exact power sums, sampled estimates,
//! truncated (`t < r`) reconstructions and observable-weighted series.

use std::ops::Deref;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::fraction::serde_rational_vec;
use crate::{Error, Result, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Computed directly from a spectrum.
    Exact,
    /// Moments produced by a (noisy) measurement oracle, possibly extended.
    Estimated,
    /// Seed moments followed by recurrence values.
    Extended,
}

/// A sequence of moments indexed from 1.
///
/// Dereferences to a zero-based slice; use [`PowerSumSeries::get`] for the
/// one-based view that matches `P_1, P_2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSumSeries {
    pub kind: SeriesKind,
    #[serde(with = "serde_rational_vec")]
    values: Vec<Rational>,
}

impl PowerSumSeries {
    pub fn new(kind: SeriesKind, values: Vec<Rational>) -> Self {
        PowerSumSeries { kind, values }
    }

    /// `P_i` for `1 <= i <= len`.
    pub fn get(&self, i: usize) -> Option<&Rational> {
        i.checked_sub(1).and_then(|idx| self.values.get(idx))
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn with_kind(mut self, kind: SeriesKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn truncated(&self, len: usize) -> Self {
        PowerSumSeries {
            kind: self.kind,
            values: self.values[..len.min(self.values.len())].to_vec(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(crate::fraction::to_f64).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl Deref for PowerSumSeries {
    type Target = [Rational];

    fn deref(&self) -> &[Rational] {
        &self.values
    }
}

/// Elementary symmetric polynomials `coeffs[0] = 1, coeffs[1..=t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricPolys {
    #[serde(with = "serde_rational_vec")]
    coeffs: Vec<Rational>,
}

impl SymmetricPolys {
    /// Wraps explicit coefficients. The leading entry must be 1.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Result<Self> {
        match coeffs.first() {
            Some(c) if *c == 1 => Ok(SymmetricPolys { coeffs }),
            _ => Err(Error::InvalidArgument("coeffs[0] must equal 1".into())),
        }
    }

    /// The truncation order `t` (number of coefficients after `coeffs[0]`).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.coeffs.get(k)
    }

    /// Keeps `coeffs[0..=t]`.
    pub fn truncated(&self, t: usize) -> Self {
        SymmetricPolys { coeffs: self.coeffs[..=t.min(self.order())].to_vec() }
    }
}

/// `P_i = Σ_j p_j^i` for `i = 1..=t`, exactly.
pub fn power_sums(spectrum: &Spectrum, t: usize) -> PowerSumSeries {
    let (mut powers, den) = common_numerators(spectrum.eigenvalues());
    let base = powers.clone();
    let mut den_pow = den.clone();
    let mut values = Vec::with_capacity(t);
    for i in 1..=t {
        if i > 1 {
            for (pw, m) in powers.iter_mut().zip(&base) {
                *pw *= m;
            }
            den_pow *= &den;
        }
        let num: Integer = powers.iter().sum();
        values.push(Rational::from((num, den_pow.clone())));
    }
    PowerSumSeries::new(SeriesKind::Exact, values)
}

/// `Σ_j p_j^k` evaluated term by term with `pow`; the reference oracle.
pub fn exact_trace_power(spectrum: &Spectrum, k: u32) -> Rational {
    let (nums, den) = common_numerators(spectrum.eigenvalues());
    let num: Integer = nums.into_iter().map(|m| m.pow(k)).sum();
    Rational::from((num, den.pow(k)))
}

// Numerators over the lcm of the denominators.
fn common_numerators(values: &[Rational]) -> (Vec<Integer>, Integer) {
    let mut den = Integer::from(1);
    for v in values {
        den.lcm_mut(v.denom());
    }
    let nums = values.iter().map(|v| v.numer() * Integer::from(&den / v.denom())).collect();
    (nums, den)
}

// Signed sum with a single reduction at the end. Denominators that divide
// the running one are absorbed without a gcd.
fn signed_sum(terms: impl IntoIterator<Item = (bool, Rational)>) -> Rational {
    let mut num = Integer::new();
    let mut den = Integer::from(1);
    for (negative, term) in terms {
        let (mut n, d) = term.into_numer_denom();
        if den.is_divisible(&d) {
            n *= Integer::from(&den / &d);
        } else if d.is_divisible(&den) {
            num *= Integer::from(&d / &den);
            den = d;
        } else {
            num *= &d;
            n *= &den;
            den *= d;
        }
        if negative {
            num -= n;
        } else {
            num += n;
        }
    }
    Rational::from((num, den))
}

/// Newton-Girard: elementary symmetric polynomials from the first `t` moments.
///
/// The moments may be exact (giving `a_k`) or estimated (giving `b_k`); the
/// arithmetic is identical and exact in both cases.
pub fn newton_girard(moments: &[Rational], t: usize) -> Result<SymmetricPolys> {
    if moments.len() < t {
        return Err(Error::SeriesTooShort { needed: t, available: moments.len() });
    }
    let mut coeffs = Vec::with_capacity(t + 1);
    coeffs.push(Rational::from(1));
    for k in 1..=t {
        let mut acc = signed_sum((1..=k).map(|i| (i % 2 == 0, Rational::from(&coeffs[k - i] * &moments[i - 1]))));
        acc /= k as u32;
        coeffs.push(acc);
    }
    Ok(SymmetricPolys { coeffs })
}

/// Extends `seed` (length `t`) to length `k` with the order-`t` recurrence
/// `x_ℓ = Σ_{j=1..t} (-1)^{j-1} c_j x_{ℓ-j}`.
pub fn extend_series(coeffs: &SymmetricPolys, seed: &[Rational], k: usize) -> Result<PowerSumSeries> {
    let t = coeffs.order();
    if seed.len() != t {
        return Err(Error::LengthMismatch { expected: t, actual: seed.len() });
    }
    if k < t {
        return Err(Error::InvalidArgument(format!("target length {k} is below the seed length {t}")));
    }
    let c = coeffs.coeffs();
    let mut values = Vec::with_capacity(k);
    values.extend_from_slice(seed);
    for l in t..k {
        let acc = signed_sum(
            (1..=t)
                .filter(|&j| !c[j].is_zero())
                .map(|j| (j % 2 == 0, Rational::from(&c[j] * &values[l - j]))),
        );
        values.push(acc);
    }
    Ok(PowerSumSeries::new(SeriesKind::Extended, values))
}
