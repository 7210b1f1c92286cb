//! The cross-trace grid `Tr(ρ^i σ^j)` for two states.
//!
//! Ground truth uses the overlap model `Tr(ρ^a σ^b) = Σ_{ij} p_i^a q_j^b O_ij`
//! with `O_ij = |⟨ψ_i|φ_j⟩|²`. The estimator chains two observable passes:
//! rows `i ≤ t` treat `ρ^i` as an observable on `σ`, then every column `j`
//! treats `σ^j` as an observable on `ρ`, seeded by the estimated rows.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::bounds::guarded_ln;
use crate::estimation::{capped_floor, derive_seed};
use crate::fraction::{self, serde_rational_vec};
use crate::observables::{apply_noise, estimate_observable_from_moments, MomentNoise};
use crate::series::{extend_series, newton_girard, power_sums};
use crate::{Error, Result, Spectrum};

/// Two spectra and the squared overlaps of their eigenvectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PairRepr", into = "PairRepr")]
pub struct StatePair {
    rho: Spectrum,
    sigma: Spectrum,
    overlap: Vec<Vec<Rational>>,
    dimension: usize,
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    rho: Spectrum,
    sigma: Spectrum,
    overlap: Vec<OverlapRow>,
    #[serde(default)]
    dimension: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct OverlapRow(#[serde(with = "serde_rational_vec")] Vec<Rational>);

impl TryFrom<PairRepr> for StatePair {
    type Error = Error;

    fn try_from(r: PairRepr) -> Result<Self> {
        let overlap = r.overlap.into_iter().map(|row| row.0).collect();
        StatePair::with_dimension(r.rho, r.sigma, overlap, r.dimension)
    }
}

impl From<StatePair> for PairRepr {
    fn from(p: StatePair) -> Self {
        PairRepr {
            rho: p.rho,
            sigma: p.sigma,
            overlap: p.overlap.into_iter().map(OverlapRow).collect(),
            dimension: Some(p.dimension),
        }
    }
}

impl StatePair {
    /// `overlap` has one row per eigenvalue of `rho` (descending order) and one
    /// column per eigenvalue of `sigma`. Row and column sums may not exceed 1.
    pub fn new(rho: Spectrum, sigma: Spectrum, overlap: Vec<Vec<Rational>>) -> Result<Self> {
        StatePair::with_dimension(rho, sigma, overlap, None)
    }

    /// Same as [`StatePair::new`] with an explicit Hilbert-space dimension
    /// (defaults to the larger rank).
    pub fn with_dimension(
        rho: Spectrum,
        sigma: Spectrum,
        overlap: Vec<Vec<Rational>>,
        dimension: Option<usize>,
    ) -> Result<Self> {
        let (r1, r2) = (rho.rank(), sigma.rank());
        if overlap.len() != r1 {
            return Err(Error::LengthMismatch { expected: r1, actual: overlap.len() });
        }
        if let Some(row) = overlap.iter().find(|row| row.len() != r2) {
            return Err(Error::LengthMismatch { expected: r2, actual: row.len() });
        }
        if overlap.iter().flatten().any(|o| *o < 0 || *o > 1) {
            return Err(Error::InvalidArgument("overlap entries must lie in [0, 1]".into()));
        }
        for (i, row) in overlap.iter().enumerate() {
            if row.iter().sum::<Rational>() > 1 {
                return Err(Error::InvalidArgument(format!("overlap row {i} sums above 1")));
            }
        }
        for j in 0..r2 {
            if overlap.iter().map(|row| &row[j]).sum::<Rational>() > 1 {
                return Err(Error::InvalidArgument(format!("overlap column {j} sums above 1")));
            }
        }
        let min_dim = r1.max(r2);
        let dimension = dimension.unwrap_or(min_dim);
        if dimension < min_dim {
            return Err(Error::InvalidArgument(format!("dimension {dimension} is below rank {min_dim}")));
        }
        Ok(StatePair { rho, sigma, overlap, dimension })
    }

    /// `σ = ρ` with identity overlap.
    pub fn diagonal(rho: Spectrum) -> Self {
        let r = rho.rank();
        let overlap = identity(r);
        StatePair { sigma: rho.clone(), rho, overlap, dimension: r }
    }

    pub fn rho(&self) -> &Spectrum {
        &self.rho
    }

    pub fn sigma(&self) -> &Spectrum {
        &self.sigma
    }

    pub fn overlap(&self) -> &[Vec<Rational>] {
        &self.overlap
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Exchanges the roles of the two states.
    pub fn swapped(&self) -> Self {
        let (r1, r2) = (self.rho.rank(), self.sigma.rank());
        let overlap = (0..r2).map(|j| (0..r1).map(|i| self.overlap[i][j].clone()).collect()).collect();
        StatePair { rho: self.sigma.clone(), sigma: self.rho.clone(), overlap, dimension: self.dimension }
    }

    /// `m_b = Σ_a p_a^i O_ab`: the diagonal of `ρ^i` in the eigenbasis of `σ`.
    fn rho_power_weights(&self, i: u32) -> Vec<Rational> {
        let pw: Vec<Rational> = self.rho.eigenvalues().iter().map(|p| pow(p, i)).collect();
        (0..self.sigma.rank())
            .map(|b| pw.iter().zip(&self.overlap).map(|(p, row)| Rational::from(p * &row[b])).sum())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn identity(r: usize) -> Vec<Vec<Rational>> {
    (0..r)
        .map(|i| (0..r).map(|j| Rational::from(u8::from(i == j))).collect())
        .collect()
}

fn pow(p: &Rational, e: u32) -> Rational {
    use rug::ops::Pow;
    Rational::from(p.pow(e))
}

/// Exact `Tr(ρ^a σ^b)` under the overlap model.
pub fn cross_trace(pair: &StatePair, a: u32, b: u32) -> Result<Rational> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidArgument("cross_trace exponents must be positive".into()));
    }
    let qb: Vec<Rational> = pair.sigma.eigenvalues().iter().map(|q| pow(q, b)).collect();
    Ok(pair
        .rho
        .eigenvalues()
        .iter()
        .zip(&pair.overlap)
        .map(|(p, row)| {
            let inner: Rational = row.iter().zip(&qb).map(|(o, q)| Rational::from(o * q)).sum();
            pow(p, a) * inner
        })
        .sum())
}

/// `min{r, ⌊ln((4k + 4l)/ε)⌋}`, at least 1. `r` defaults to no cap.
pub fn effective_rank_pair(k: usize, l: usize, epsilon: f64, r: Option<usize>) -> Result<usize> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidArgument("k and l must be positive".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    Ok(capped_floor((4.0 * (k + l) as f64 / epsilon).ln(), r))
}

/// Per-seed error budgets for the two passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBudget {
    /// `Tr(σ^j)`: `ε/(8 l t ln t)`.
    pub sigma_plain: f64,
    /// `Tr(ρ^i)`: `ε/(4 k t ln t)`.
    pub rho_plain: f64,
    /// `Tr(ρ^i σ^j)` seeds: `ε/8`.
    pub mixed: f64,
}

impl PairBudget {
    pub fn new(k: usize, l: usize, t: usize, epsilon: f64) -> Self {
        let tl = t as f64 * guarded_ln(t);
        PairBudget {
            sigma_plain: epsilon / (8.0 * l as f64 * tl),
            rho_plain: epsilon / (4.0 * k as f64 * tl),
            mixed: epsilon / 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOracle {
    Exact,
    /// Every seed moved by its full budget with seeded random signs.
    Threshold { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    pub k: usize,
    pub l: usize,
    pub epsilon: f64,
    /// Overrides [`effective_rank_pair`] when set.
    pub t: Option<usize>,
    pub oracle: PairOracle,
}

impl PairConfig {
    pub fn new(k: usize, l: usize, epsilon: f64) -> Self {
        PairConfig { k, l, epsilon, t: None, oracle: PairOracle::Exact }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_oracle(mut self, oracle: PairOracle) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn effective_t(&self, pair: &StatePair) -> Result<usize> {
        let t = match self.t {
            Some(0) => return Err(Error::InvalidArgument("t must be positive".into())),
            Some(t) => t,
            None => effective_rank_pair(
                self.k,
                self.l,
                self.epsilon,
                Some(pair.rho.rank().max(pair.sigma.rank())),
            )?,
        };
        Ok(t)
    }
}

/// `Tr(ρ^i σ^j)` for `0 ≤ i ≤ k`, `0 ≤ j ≤ l`, where row and column zero hold
/// the marginals and `(0, 0)` holds the dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossTraceGrid {
    k: usize,
    l: usize,
    dimension: usize,
    rho_series: Vec<Rational>,
    sigma_series: Vec<Rational>,
    /// Row-major, `k × l`, one-based indices shifted down by one.
    values: Vec<Rational>,
}

#[derive(Serialize)]
struct GridJson<'a> {
    k: usize,
    l: usize,
    dimension: usize,
    #[serde(with = "serde_rational_vec")]
    rho_series: &'a [Rational],
    #[serde(with = "serde_rational_vec")]
    sigma_series: &'a [Rational],
    rows: Vec<RowJson<'a>>,
}

#[derive(Serialize)]
#[serde(transparent)]
struct RowJson<'a>(#[serde(with = "serde_rational_vec")] &'a [Rational]);

impl CrossTraceGrid {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `Tr(ρ^i σ^j)`; `i = 0` or `j = 0` gives the marginals.
    pub fn get(&self, i: usize, j: usize) -> Option<Rational> {
        if i > self.k || j > self.l {
            return None;
        }
        Some(match (i, j) {
            (0, 0) => Rational::from(self.dimension),
            (0, j) => self.sigma_series[j - 1].clone(),
            (i, 0) => self.rho_series[i - 1].clone(),
            (i, j) => self.values[(i - 1) * self.l + (j - 1)].clone(),
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.values[(i - 1) * self.l + (j - 1)]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.values[(i - 1) * self.l..i * self.l]
    }

    pub fn rho_series(&self) -> &[Rational] {
        &self.rho_series
    }

    pub fn sigma_series(&self) -> &[Rational] {
        &self.sigma_series
    }

    pub fn transposed(&self) -> Self {
        let values = (1..=self.l)
            .flat_map(|j| (1..=self.k).map(move |i| (i, j)))
            .map(|(i, j)| self.entry(i, j).clone())
            .collect();
        CrossTraceGrid {
            k: self.l,
            l: self.k,
            dimension: self.dimension,
            rho_series: self.sigma_series.clone(),
            sigma_series: self.rho_series.clone(),
            values,
        }
    }

    /// Largest `|grid_ij − Tr(ρ^i σ^j)|` over the `k × l` block.
    pub fn max_error(&self, pair: &StatePair) -> Result<Rational> {
        let mut worst = Rational::new();
        for i in 1..=self.k {
            for j in 1..=self.l {
                let d = (self.entry(i, j) - cross_trace(pair, i as u32, j as u32)?).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        Ok(worst)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "value_num", "value_den", "value_float"])?;
        for i in 1..=self.k {
            for j in 1..=self.l {
                let v = self.entry(i, j);
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    v.numer().to_string(),
                    v.denom().to_string(),
                    format!("{:.16e}", fraction::to_f64(v)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let rows = (1..=self.k).map(|i| RowJson(self.row(i))).collect();
        let g = GridJson {
            k: self.k,
            l: self.l,
            dimension: self.dimension,
            rho_series: &self.rho_series,
            sigma_series: &self.sigma_series,
            rows,
        };
        Ok(serde_json::to_string_pretty(&g)?)
    }
}

/// Exact grid, computed directly from the overlap model.
pub fn exact_grid(pair: &StatePair, k: usize, l: usize) -> Result<CrossTraceGrid> {
    let values = (1..=k)
        .flat_map(|i| (1..=l).map(move |j| (i, j)))
        .map(|(i, j)| cross_trace(pair, i as u32, j as u32))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossTraceGrid {
        k,
        l,
        dimension: pair.dimension,
        rho_series: power_sums(&pair.rho, k).into_values(),
        sigma_series: power_sums(&pair.sigma, l).into_values(),
        values,
    })
}

fn threshold_noise(values: &mut [Rational], bound: f64, seed: u64) -> Result<()> {
    let noise = MomentNoise::ThresholdSigns { plain_bound: bound, mixed_bound: 0.0, seed };
    apply_noise(values, &mut [], &noise)
}

fn mixed_noise(values: &mut [Rational], bound: f64, seed: u64) -> Result<()> {
    let noise = MomentNoise::ThresholdSigns { plain_bound: 0.0, mixed_bound: bound, seed };
    apply_noise(&mut [], values, &noise)
}

/// Estimates the `k × l` grid from `t` moments of each state and `t × t`
/// mixed seeds.
pub fn run_algorithm3(pair: &StatePair, config: &PairConfig) -> Result<CrossTraceGrid> {
    let (k, l) = (config.k, config.l);
    if k == 0 || l == 0 {
        return Err(Error::InvalidArgument("k and l must be positive".into()));
    }
    let t = config.effective_t(pair)?;
    let (tr, tc) = (t.min(k), t.min(l));
    let budget = PairBudget::new(k, l, t, config.epsilon);
    let seed_for = |path: &[u64]| match config.oracle {
        PairOracle::Exact => None,
        PairOracle::Threshold { seed } => Some(derive_seed(seed, path)),
    };

    let mut sigma_plain = power_sums(&pair.sigma, tc).into_values();
    let mut rho_plain = power_sums(&pair.rho, tr).into_values();
    if let Some(s) = seed_for(&[0]) {
        threshold_noise(&mut sigma_plain, budget.sigma_plain, s)?;
    }
    if let Some(s) = seed_for(&[1]) {
        threshold_noise(&mut rho_plain, budget.rho_plain, s)?;
    }

    // Rows: M = ρ^i measured against σ, extended along j.
    let rows = (1..=tr)
        .into_par_iter()
        .map(|i| {
            let weights = pair.rho_power_weights(i as u32);
            let mut mixed: Vec<Rational> = (1..=tc)
                .map(|j| {
                    let qj = pair.sigma.eigenvalues().iter().map(|q| pow(q, j as u32));
                    qj.zip(&weights).map(|(q, m)| q * m).sum()
                })
                .collect();
            if let Some(s) = seed_for(&[2, i as u64]) {
                mixed_noise(&mut mixed, budget.mixed, s)?;
            }
            Ok(estimate_observable_from_moments(&sigma_plain, &mixed, l)?.series.into_values())
        })
        .collect::<Result<Vec<_>>>()?;

    // Columns: M = σ^j measured against ρ, seeded by the estimated rows.
    let columns = (1..=l)
        .into_par_iter()
        .map(|j| {
            let seeds: Vec<Rational> = rows.iter().map(|row| row[j - 1].clone()).collect();
            Ok(estimate_observable_from_moments(&rho_plain, &seeds, k)?.series.into_values())
        })
        .collect::<Result<Vec<_>>>()?;

    let values = (0..k).flat_map(|i| columns.iter().map(move |col| col[i].clone())).collect();
    let rho_b = newton_girard(&rho_plain, tr)?;
    let sigma_b = newton_girard(&sigma_plain, tc)?;
    Ok(CrossTraceGrid {
        k,
        l,
        dimension: pair.dimension,
        rho_series: extend_series(&rho_b, &rho_plain, k)?.into_values(),
        sigma_series: extend_series(&sigma_b, &sigma_plain, l)?.into_values(),
        values,
    })
}

/// A doubly stochastic `n × n` matrix built as a convex combination of
/// `terms` random permutation matrices with integer weights.
pub fn random_doubly_stochastic<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> Vec<Vec<Rational>> {
    let weights: Vec<u64> = (0..terms.max(1)).map(|_| rng.random_range(1..=20)).collect();
    let total: u64 = weights.iter().sum();
    let mut m = vec![vec![Rational::new(); n]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for w in weights {
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            m[i][j] += Rational::from((w, total));
        }
    }
    m
}
