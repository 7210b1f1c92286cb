//! Entanglement detection from partial-transpose moments.
//!
//! The elementary symmetric polynomials `e_k` of the partial-transpose
//! spectrum follow from its moments by the Newton-Girard recursion. A PSD
//! spectrum has every `e_k ≥ 0`, so any negative `e_k` certifies entanglement.

use std::io::Write;

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use super::dense::{hermitian_eigenvalues, pt_moments, DenseHermitian};
use crate::series::newton_girard;
use crate::{fraction, Error, Result};

/// `e_i < −ENTANGLEMENT_TOL` counts as negative on the floating-point path.
pub const ENTANGLEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Verdict {
    /// `e_witness` is the first negative coefficient.
    Entangled { witness: usize },
    Inconclusive,
}

impl Verdict {
    pub fn is_entangled(&self) -> bool {
        matches!(self, Verdict::Entangled { .. })
    }

    pub fn witness(&self) -> Option<usize> {
        match self {
            Verdict::Entangled { witness } => Some(*witness),
            Verdict::Inconclusive => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub verdict: Verdict,
    /// `e_0..e_r`.
    pub e: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDetection {
    pub verdict: Verdict,
    pub e: Vec<Rational>,
}

fn check_len(available: usize, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if available < r {
        return Err(Error::SeriesTooShort { needed: r, available });
    }
    Ok(())
}

/// `e_k = (1/k) Σ_{i=1..k} (−1)^{i−1} e_{k−i} p_i` in floating point.
pub fn esp_from_moments(pt: &[f64], r: usize) -> Vec<f64> {
    let mut e = vec![1.0];
    for k in 1..=r {
        let mut acc = 0.0;
        for i in 1..=k {
            let term = e[k - i] * pt[i - 1];
            acc += if i % 2 == 1 { term } else { -term };
        }
        e.push(acc / k as f64);
    }
    e
}

/// Verdict from the first `r` partial-transpose moments.
pub fn detect_entanglement(pt: &[f64], r: usize) -> Result<Detection> {
    check_len(pt.len(), r)?;
    let e = esp_from_moments(pt, r);
    let verdict = match (1..=r).find(|&i| e[i] < -ENTANGLEMENT_TOL) {
        Some(witness) => Verdict::Entangled { witness },
        None => Verdict::Inconclusive,
    };
    Ok(Detection { verdict, e })
}

/// Same with exact moments and an exact sign test.
pub fn detect_entanglement_exact(pt: &[Rational], r: usize) -> Result<ExactDetection> {
    check_len(pt.len(), r)?;
    let e = newton_girard(&pt[..r], r)?.coeffs().to_vec();
    let verdict = match (1..=r).find(|&i| e[i] < 0) {
        Some(witness) => Verdict::Entangled { witness },
        None => Verdict::Inconclusive,
    };
    Ok(ExactDetection { verdict, e })
}

/// Verdict from a known spectrum: `e_k` by direct product expansion.
pub fn direct_sign_check(eigenvalues: &[f64]) -> Detection {
    let mut e = vec![0.0; eigenvalues.len() + 1];
    e[0] = 1.0;
    for (n, &x) in eigenvalues.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    let verdict = match (1..e.len()).find(|&i| e[i] < -ENTANGLEMENT_TOL) {
        Some(witness) => Verdict::Entangled { witness },
        None => Verdict::Inconclusive,
    };
    Detection { verdict, e }
}

/// Computes PT moments up to the full dimension and runs the detector.
pub fn detect_state(m: &DenseHermitian, dim_a: usize, dim_b: usize) -> Result<Detection> {
    let d = m.dim();
    detect_entanglement(&pt_moments(m, dim_a, dim_b, d)?, d)
}

/// [`detect_state`] and the eigenvalue-based check for each state.
pub fn detect_batch(states: &[DenseHermitian], dim_a: usize, dim_b: usize) -> Result<Vec<(Detection, Detection)>> {
    states
        .par_iter()
        .map(|m| {
            let moments = detect_state(m, dim_a, dim_b)?;
            let pt = super::dense::partial_transpose(m, dim_a, dim_b)?;
            let direct = direct_sign_check(&hermitian_eigenvalues(&pt)?);
            Ok((moments, direct))
        })
        .collect()
}

/// Square matrix over the rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(dim: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, actual: data.len() });
        }
        Ok(RationalMatrix { dim, data })
    }

    /// `w|Φ+⟩⟨Φ+| + (1 − w) I/4`.
    pub fn werner(w: &Rational) -> Self {
        let noise: Rational = (1 - w.clone()) / 4u32;
        let half_w = Rational::from(w / 2u32);
        let mut data = vec![Rational::new(); 16];
        for i in 0..4 {
            data[i * 4 + i] = noise.clone();
        }
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            data[i * 4 + j] += &half_w;
        }
        RationalMatrix { dim: 4, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.dim + j]
    }

    pub fn to_dense(&self) -> Result<DenseHermitian> {
        let re: Vec<f64> = self.data.iter().map(fraction::to_f64).collect();
        DenseHermitian::from_real(self.dim, &re)
    }

    fn mul(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut data = vec![Rational::new(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.cmp0().is_eq() {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += Rational::from(a * other.get(k, j));
                }
            }
        }
        RationalMatrix { dim: d, data }
    }
}

pub fn exact_partial_transpose(m: &RationalMatrix, dim_a: usize, dim_b: usize) -> Result<RationalMatrix> {
    if dim_a * dim_b != m.dim {
        return Err(Error::InvalidArgument(format!("{dim_a}·{dim_b} does not match dimension {}", m.dim)));
    }
    let d = m.dim;
    let mut data = vec![Rational::new(); d * d];
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    data[(a * dim_b + b2) * d + (a2 * dim_b + b)] = m.get(a * dim_b + b, a2 * dim_b + b2).clone();
                }
            }
        }
    }
    Ok(RationalMatrix { dim: d, data })
}

/// Exact `Tr[(ρ^Γ)^k]` for `k = 1..=t`.
pub fn exact_pt_moments(m: &RationalMatrix, dim_a: usize, dim_b: usize, t: usize) -> Result<Vec<Rational>> {
    let pt = exact_partial_transpose(m, dim_a, dim_b)?;
    let mut power = pt.clone();
    let mut out = Vec::with_capacity(t);
    for k in 1..=t {
        if k > 1 {
            power = power.mul(&pt);
        }
        out.push((0..pt.dim).map(|i| power.get(i, i)).sum());
    }
    Ok(out)
}

/// One line of a verdict table.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub label: String,
    pub entangled: bool,
    pub witness: Option<usize>,
    pub min_e: f64,
}

impl VerdictRow {
    pub fn from_detection(label: impl Into<String>, d: &Detection) -> Self {
        VerdictRow {
            label: label.into(),
            entangled: d.verdict.is_entangled(),
            witness: d.verdict.witness(),
            min_e: d.e.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

pub fn write_verdicts_csv<W: Write>(rows: &[VerdictRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "entangled", "witness", "min_e"])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.entangled.to_string(),
            r.witness.map(|i| i.to_string()).unwrap_or_default(),
            format!("{:.16e}", r.min_e),
        ])?;
    }
    w.flush()?;
    Ok(())
}
