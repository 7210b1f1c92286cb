//! Trace functionals evaluated from power-sum series.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::fraction::serde_rational_vec;
use crate::multistate::CrossTraceGrid;
use crate::{Error, Result};

/// Polynomial `Σ_k c_k x^k` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    #[serde(with = "serde_rational_vec")]
    coeffs: Vec<Rational>,
}

impl PolynomialSpec {
    /// Trailing zero coefficients are dropped; the zero polynomial keeps `c_0`.
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.cmp0().is_eq()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rational::new());
        }
        PolynomialSpec { coeffs }
    }

    /// Degree-`m` truncation of `(1 + x)^α`: `c_k = C(α, k)`.
    pub fn binomial_series(alpha: &Rational, m: usize) -> Self {
        let mut coeffs = Vec::with_capacity(m + 1);
        let mut c = Rational::from(1);
        coeffs.push(c.clone());
        for k in 1..=m {
            c *= Rational::from(alpha - (k - 1) as u64);
            c /= k as u64;
            coeffs.push(c.clone());
        }
        PolynomialSpec::new(coeffs)
    }

    /// Degree-`m` truncation of `exp(βx)`: `c_k = β^k / k!`.
    pub fn exp_taylor(beta: &Rational, m: usize) -> Self {
        let mut coeffs = Vec::with_capacity(m + 1);
        let mut c = Rational::from(1);
        coeffs.push(c.clone());
        for k in 1..=m {
            c *= beta;
            c /= k as u64;
            coeffs.push(c.clone());
        }
        PolynomialSpec::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ |c_k|`.
    pub fn coeff_l1(&self) -> Rational {
        self.coeffs.iter().map(|c| Rational::from(c.abs_ref())).sum()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }
}

fn need(series: &[Rational], len: usize) -> Result<()> {
    if series.len() < len {
        return Err(Error::SeriesTooShort { needed: len, available: series.len() });
    }
    Ok(())
}

/// `Tr(f(ρ)) = c_0·rank_or_dim + Σ_{k≥1} c_k P_k`.
///
/// `rank_or_dim` says how many eigenvalues the constant term is counted for:
/// the rank when zero eigenvalues are ignored, the dimension otherwise.
pub fn nonlinear_trace(poly: &PolynomialSpec, series: &[Rational], rank_or_dim: usize) -> Result<Rational> {
    if rank_or_dim == 0 {
        return Err(Error::InvalidArgument("rank_or_dim must be positive".into()));
    }
    need(series, poly.degree())?;
    let c = poly.coeffs();
    let mut total = Rational::from(&c[0] * rank_or_dim as u64);
    for (ck, pk) in c[1..].iter().zip(series) {
        total += Rational::from(ck * pk);
    }
    Ok(total)
}

/// `S_q = Σ_{i=1..q} Tr((ρ − I)^i ρ)`, expanded binomially over `P_1..P_{q+1}`.
pub fn gibbs_cost(series: &[Rational], q: usize) -> Result<Rational> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    need(series, q + 1)?;
    let mut total = Rational::new();
    for i in 1..=q as u32 {
        for j in 0..=i {
            let term = Rational::from(&series[j as usize] * Integer::from(Integer::binomial_u(i, j)));
            if (i - j) % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    Ok(total)
}

/// `Σ_{i,j} a_i b_j Tr(ρ^i σ^j)`, approximating `Tr[(1+ρ)^α (1+σ)^{1−α}]`
/// when `a`, `b` truncate `(1+x)^α` and `(1+x)^{1−α}`.
pub fn k_alpha_distance(grid: &CrossTraceGrid, a: &PolynomialSpec, b: &PolynomialSpec) -> Result<Rational> {
    if grid.k() < a.degree() {
        return Err(Error::SeriesTooShort { needed: a.degree(), available: grid.k() });
    }
    if grid.l() < b.degree() {
        return Err(Error::SeriesTooShort { needed: b.degree(), available: grid.l() });
    }
    let mut total = Rational::new();
    for (i, ca) in a.coeffs().iter().enumerate() {
        if ca.cmp0().is_eq() {
            continue;
        }
        for (j, cb) in b.coeffs().iter().enumerate() {
            let v = grid.get(i, j).expect("index checked against grid size");
            total += Rational::from(ca * cb) * v;
        }
    }
    Ok(total)
}

/// The two truncated factors for `K_α`.
pub fn k_alpha_polys(alpha: &Rational, m: usize) -> (PolynomialSpec, PolynomialSpec) {
    let beta = 1 - alpha.clone();
    (PolynomialSpec::binomial_series(alpha, m), PolynomialSpec::binomial_series(&beta, m))
}
