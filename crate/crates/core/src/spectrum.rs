use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::fraction::serde_rational_vec;
use crate::{Error, Result};

/// Eigenvalues of a density operator restricted to its support.
///
/// Every eigenvalue is strictly positive, they sum to exactly one, and they
/// are stored in descending order. Constructors reject input that violates
/// this rather than renormalizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr", into = "SpectrumRepr")]
pub struct Spectrum {
    eigenvalues: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    #[serde(with = "serde_rational_vec")]
    eigenvalues: Vec<Rational>,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;

    fn try_from(repr: SpectrumRepr) -> Result<Self> {
        Spectrum::new(repr.eigenvalues)
    }
}

impl From<Spectrum> for SpectrumRepr {
    fn from(s: Spectrum) -> Self {
        SpectrumRepr { eigenvalues: s.eigenvalues }
    }
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<Rational>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues".into()));
        }
        if let Some(bad) = eigenvalues.iter().find(|p| **p <= 0) {
            return Err(Error::InvalidSpectrum(format!("eigenvalue {bad} is not positive")));
        }
        let total: Rational = eigenvalues.iter().sum();
        if total != 1 {
            return Err(Error::InvalidSpectrum(format!("eigenvalues sum to {total}, not 1")));
        }
        eigenvalues.sort_by(|a, b| b.cmp(a));
        Ok(Spectrum { eigenvalues })
    }

    /// Normalizes positive integer weights exactly: `p_i = w_i / Σ w`.
    pub fn from_weights(weights: &[u64]) -> Result<Self> {
        if weights.contains(&0) {
            return Err(Error::InvalidSpectrum("zero weight".into()));
        }
        let total: rug::Integer = weights.iter().map(|&w| rug::Integer::from(w)).sum();
        let eigenvalues = weights
            .iter()
            .map(|&w| Rational::from((rug::Integer::from(w), total.clone())))
            .collect();
        Spectrum::new(eigenvalues)
    }

    /// A rank-one (pure) state.
    pub fn pure() -> Self {
        Spectrum { eigenvalues: vec![Rational::from(1)] }
    }

    /// The maximally mixed state of rank `r`.
    pub fn uniform(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidSpectrum("rank must be positive".into()));
        }
        Ok(Spectrum { eigenvalues: vec![Rational::from((1, r as u64)); r] })
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Rational] {
        &self.eigenvalues
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(crate::fraction::to_f64).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
