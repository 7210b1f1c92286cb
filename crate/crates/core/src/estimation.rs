//! Moment sampling and the end-to-end estimator for `Tr(ρ^k)`.
//!
//! The measurement step is emulated at the spectral level: each of the first
//! `t` moments is a frequency `X/n` with `X ~ Binomial(n, Tr(ρ^i))`. The
//! remaining moments come from the Newton-Girard recurrence driven by the
//! estimated symmetric polynomials `b_k`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::fraction::{serde_rational, serde_rational_vec};
use crate::series::{exact_trace_power, extend_series, newton_girard, power_sums};
use crate::{Error, PowerSumSeries, Result, SeriesKind, Spectrum, SymmetricPolys};

/// Above this many trials a binomial draw is replaced by a rounded Gaussian
/// with the same mean and variance.
pub const NORMAL_APPROX_THRESHOLD: u64 = 1_000_000_000;

/// Largest sample count accepted by [`required_runs`] and [`scenario_runs`].
pub const MAX_RUNS: u64 = 1 << 63;

/// How the first `t` moments are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentOracle {
    /// Binomial frequency with `n` trials per moment.
    Binomial,
    /// The exact moments (zero per-moment error).
    Exact,
}

/// Rule for the per-moment trial count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleRule {
    /// `⌈(k²/ε²) ln(1/δ)⌉`.
    Confidence,
    /// `⌊k²/ε²⌋`, the count used by the published simulations.
    Scenario,
    Fixed(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Highest power to estimate.
    pub k: usize,
    /// Additive error budget.
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    /// Failure probability.
    pub delta: f64,
    /// Number of moments taken from the oracle.
    pub t: usize,
    pub seed: u64,
    pub oracle: MomentOracle,
    pub samples: SampleRule,
}

impl EstimationConfig {
    pub fn new(k: usize, epsilon: Rational, delta: f64, t: usize, seed: u64) -> Result<Self> {
        let cfg = EstimationConfig {
            k,
            epsilon,
            delta,
            t,
            seed,
            oracle: MomentOracle::Binomial,
            samples: SampleRule::Confidence,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_oracle(mut self, oracle: MomentOracle) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_samples(mut self, samples: SampleRule) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if self.t == 0 {
            return Err(Error::InvalidArgument("t must be positive".into()));
        }
        if self.epsilon <= 0 {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument("delta must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Trials per moment under the configured rule.
    pub fn samples_per_moment(&self) -> Result<u64> {
        match self.samples {
            SampleRule::Confidence => required_runs(self.k, &self.epsilon, self.delta),
            SampleRule::Scenario => scenario_runs(self.k, &self.epsilon),
            SampleRule::Fixed(n) if n > 0 => Ok(n),
            SampleRule::Fixed(_) => Err(Error::InvalidArgument("fixed sample count must be positive".into())),
        }
    }
}

/// Output of [`run_algorithm1`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EstimateRepr", into = "EstimateRepr")]
pub struct EstimateSeries {
    /// `Q_1..Q_k`: oracle values up to `t`, recurrence values after.
    pub q: PowerSumSeries,
    /// `b_0..b_t` from the oracle values.
    pub b: SymmetricPolys,
    /// Zero when the exact oracle was used.
    pub samples_per_moment: u64,
    pub config: EstimationConfig,
}

#[derive(Serialize, Deserialize)]
struct EstimateRepr {
    config: EstimationConfig,
    samples_per_moment: u64,
    #[serde(with = "serde_rational_vec")]
    q: Vec<Rational>,
    /// Float rendering of `q`, ignored on input.
    #[serde(default, skip_deserializing)]
    q_float: Vec<f64>,
    #[serde(with = "serde_rational_vec")]
    b: Vec<Rational>,
}

impl From<EstimateSeries> for EstimateRepr {
    fn from(e: EstimateSeries) -> Self {
        EstimateRepr {
            q_float: e.q.to_f64(),
            q: e.q.into_values(),
            b: e.b.coeffs().to_vec(),
            samples_per_moment: e.samples_per_moment,
            config: e.config,
        }
    }
}

impl TryFrom<EstimateRepr> for EstimateSeries {
    type Error = Error;

    fn try_from(r: EstimateRepr) -> Result<Self> {
        r.config.validate()?;
        Ok(EstimateSeries {
            q: PowerSumSeries::new(SeriesKind::Estimated, r.q),
            b: SymmetricPolys::from_coeffs(r.b)?,
            samples_per_moment: r.samples_per_moment,
            config: r.config,
        })
    }
}

impl EstimateSeries {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `min{r, ⌊ln(2k/ε)⌋}`, at least 1.
pub fn effective_rank(k: usize, epsilon: f64, r: Option<usize>) -> usize {
    capped_floor((2.0 * k as f64 / epsilon).ln(), r)
}

/// `min{r, ⌊ln(k/ε) / ln ln(k/ε)⌋}`, at least 1. Requires `k/ε > e`.
pub fn effective_rank_alt(k: usize, epsilon: f64, r: Option<usize>) -> Result<usize> {
    let ratio = k as f64 / epsilon;
    if !(ratio > std::f64::consts::E) {
        return Err(Error::InvalidArgument(format!("k/epsilon = {ratio} must exceed e")));
    }
    let l = ratio.ln();
    Ok(capped_floor(l / l.ln(), r))
}

pub(crate) fn capped_floor(x: f64, r: Option<usize>) -> usize {
    let v = if x.is_finite() && x >= 1.0 { x.floor() as usize } else { 1 };
    match r {
        Some(r) => v.min(r).max(1),
        None => v,
    }
}

/// `⌈(k²/ε²) ln(1/δ)⌉` trials per moment.
pub fn required_runs(k: usize, epsilon: &Rational, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1)".into()));
    }
    let base = k_over_eps_squared(k, epsilon)?.to_f64();
    let x = base * (1.0 / delta).ln();
    // Guard against ln rounding pushing an integral product just above an integer.
    let n = (x * (1.0 - 1e-12)).ceil().max(1.0);
    if !(n <= MAX_RUNS as f64) {
        return Err(Error::Overflow(format!("{x:e} runs exceed 2^63")));
    }
    Ok(n as u64)
}

/// `⌊k²/ε²⌋` trials per moment, computed exactly.
pub fn scenario_runs(k: usize, epsilon: &Rational) -> Result<u64> {
    let x = k_over_eps_squared(k, epsilon)?;
    let n = x.floor().into_numer_denom().0;
    if n > MAX_RUNS {
        return Err(Error::Overflow(format!("{n} runs exceed 2^63")));
    }
    let n = n.to_u64().expect("bounded above");
    Ok(n.max(1))
}

fn k_over_eps_squared(k: usize, epsilon: &Rational) -> Result<Rational> {
    if *epsilon <= 0 {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let k = Integer::from(k);
    Ok(Rational::from(k.square()) / Rational::from(epsilon.square_ref()))
}

/// One binomial frequency `X/n` with `X ~ Binomial(n, Tr(ρ^i))`.
pub fn sample_trace_power<R: Rng + ?Sized>(
    spectrum: &Spectrum,
    i: u32,
    n: u64,
    rng: &mut R,
) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let p = exact_trace_power(spectrum, i);
    let hits = sample_binomial(n, &p, rng)?;
    Ok(Rational::from((Integer::from(hits), Integer::from(n))))
}

fn sample_binomial<R: Rng + ?Sized>(n: u64, p: &Rational, rng: &mut R) -> Result<u64> {
    if *p == 1 {
        return Ok(n);
    }
    if p.cmp0().is_le() {
        return Ok(0);
    }
    let pf = p.to_f64();
    if n <= NORMAL_APPROX_THRESHOLD {
        let dist = Binomial::new(n, pf).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        return Ok(dist.sample(rng));
    }
    let nf = n as f64;
    let z: f64 = StandardNormal.sample(rng);
    let x = (nf * pf + (nf * pf * (1.0 - pf)).sqrt() * z).round();
    Ok(x.clamp(0.0, nf) as u64)
}

/// Independent RNG stream for moment index `i` under `seed`.
pub fn moment_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// Mixes `seed` with a path of labels into a fresh 64-bit seed (splitmix64).
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(seed), |acc, &x| mix(acc ^ mix(x)))
}

/// Steps 2 and 3: symmetric polynomials from the oracle moments and the
/// recurrence up to length `k`.
pub fn estimate_from_moments(moments: &[Rational], k: usize) -> Result<(PowerSumSeries, SymmetricPolys)> {
    let t = moments.len().min(k);
    let b = newton_girard(moments, t)?;
    let q = extend_series(&b, &moments[..t], k)?.with_kind(SeriesKind::Estimated);
    Ok((q, b))
}

/// Full estimator: oracle moments `1..=t`, then recurrence up to `k`.
///
/// When `t > k` only the first `k` moments are requested from the oracle.
pub fn run_algorithm1(spectrum: &Spectrum, config: &EstimationConfig) -> Result<EstimateSeries> {
    config.validate()?;
    let t = config.t.min(config.k);
    let (moments, n) = match config.oracle {
        MomentOracle::Exact => (power_sums(spectrum, t).into_values(), 0),
        MomentOracle::Binomial => {
            let n = config.samples_per_moment()?;
            let moments = (1..=t)
                .map(|i| {
                    let mut rng = moment_rng(config.seed, i as u64);
                    sample_trace_power(spectrum, i as u32, n, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            (moments, n)
        }
    };
    let (q, b) = estimate_from_moments(&moments, config.k)?;
    Ok(EstimateSeries { q, b, samples_per_moment: n, config: config.clone() })
}

/// `max_{i ≤ len} |q_i − P_i|` as an exact rational.
pub fn max_abs_error(estimate: &[Rational], exact: &[Rational]) -> Rational {
    estimate
        .iter()
        .zip(exact)
        .map(|(a, b)| Rational::from(a - b).abs())
        .max()
        .unwrap_or_default()
}
