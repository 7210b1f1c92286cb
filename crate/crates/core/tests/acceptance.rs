//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! verdict lines are always printed; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::RngCore;
use rug::Rational;

use tracepow_core::applications::dense::{hermitian_eigenvalues, partial_transpose, DenseHermitian};
use tracepow_core::applications::entanglement::{
    detect_batch, detect_entanglement_exact, detect_state, exact_pt_moments, RationalMatrix,
};
use tracepow_core::applications::{gibbs_cost, nonlinear_trace, PolynomialSpec};
use tracepow_core::bounds::{esp_max_bound, lemma1_bound, theorem_threshold, ThresholdVariant};
use tracepow_core::estimation::{max_abs_error, moment_rng};
use tracepow_core::multistate::{cross_trace, random_doubly_stochastic, run_algorithm3, PairConfig, StatePair};
use tracepow_core::observables::{
    effective_rank_observable, observable_power_sums, run_algorithm2, MomentNoise, ObservableConfig,
    ObservableWeights,
};
use tracepow_core::scenarios::{run_scenario1, run_scenario2, RankFormula, Scenario1Config, Scenario2Config};
use tracepow_core::{exact_trace_power, extend_series, newton_girard, power_sums, Spectrum};

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_spectrum<R: Rng>(r: usize, rng: &mut R) -> Spectrum {
    let w: Vec<u64> = (0..r).map(|_| rng.random_range(1..=1000)).collect();
    Spectrum::from_weights(&w).unwrap()
}

fn exactness_at_rank() -> Outcome {
    let mut rng = moment_rng(1001, 0);
    let mut mismatches = 0;
    for _ in 0..200 {
        let r = rng.random_range(1..=16);
        let s = random_spectrum(r, &mut rng);
        let seed = power_sums(&s, r);
        let a = newton_girard(&seed, r).unwrap();
        let ext = extend_series(&a, &seed, 256).unwrap();
        if (1..=256u32).any(|k| ext[k as usize - 1] != exact_trace_power(&s, k)) {
            mismatches += 1;
        }
    }
    Outcome { pass: mismatches == 0, detail: format!("200 spectra, k = 256, {mismatches} mismatches") }
}

fn lemma1_perturbation() -> Outcome {
    let mut rng = moment_rng(1002, 0);
    let mut violations = 0;
    for _ in 0..10_000 {
        let r = rng.random_range(1..=8);
        let s = random_spectrum(r, &mut rng);
        let exact = power_sums(&s, r);
        // Perturbed moments stay in [0, 1], as any trace of a state power does.
        let eps: Vec<Rational> = exact
            .iter()
            .map(|p| {
                let e = Rational::from((rng.random_range(-100_000i64..=100_000), 1_000_000));
                let v = Rational::from(p + &e);
                if v > 1 {
                    1 - p.clone()
                } else if v < 0 {
                    Rational::from(-p)
                } else {
                    e
                }
            })
            .collect();
        let noisy: Vec<Rational> = exact.iter().zip(&eps).map(|(p, e)| Rational::from(p + e)).collect();
        let a = newton_girard(&exact, r).unwrap();
        let b = newton_girard(&noisy, r).unwrap();
        for k in 1..=r {
            let d = Rational::from(b.get(k).unwrap() - a.get(k).unwrap()).abs();
            if d > lemma1_bound(&eps[..k]) {
                violations += 1;
            }
        }
    }
    Outcome { pass: violations == 0, detail: format!("10000 pairs, {violations} violations") }
}

fn lemma2_scenario2() -> Outcome {
    let report = run_scenario2(&Scenario2Config::standard(1003)).unwrap();
    let over_bound = report.rows.iter().filter(|r| !r.satisfied).count();
    let at8: Vec<_> = report.rows.iter().filter(|r| r.t == 8).collect();
    let above: Vec<String> = at8
        .iter()
        .filter(|r| r.max_error_float >= 1e-6)
        .map(|r| format!("{}={:.3e}", r.distribution, r.max_error_float))
        .collect();
    let worst8 = at8.iter().map(|r| r.max_error_float).fold(0.0, f64::max);
    Outcome {
        pass: over_bound == 0 && above.is_empty(),
        detail: format!(
            "{} rows, {over_bound} above bound; t = 8 max {worst8:.3e}{}",
            report.rows.len(),
            if above.is_empty() { String::new() } else { format!(", at or above 1e-6: {}", above.join(" ")) }
        ),
    }
}

fn scenario1_grid() -> Outcome {
    let report = run_scenario1(&Scenario1Config::standard(RankFormula::EffRank, 1004)).unwrap();
    let runs = report.total_runs();
    let bad = report.total_violations();
    let rate = 1.0 - bad as f64 / runs as f64;
    Outcome {
        pass: runs == 3360 && rate >= 0.99,
        detail: format!("{runs} runs, {bad} over ε, success rate {:.4}", rate),
    }
}

fn theorem3_contract() -> Outcome {
    let mut rng = moment_rng(1005, 0);
    let k = 64;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for trial in 0..100u64 {
        let r = rng.random_range(1..=8);
        let s = random_spectrum(r, &mut rng);
        let norm = Rational::from((rng.random_range(1..=4i64), 1));
        let m: Vec<Rational> = (0..r)
            .map(|_| Rational::from((rng.random_range(-1000i64..=1000), 1000)) * &norm)
            .collect();
        let w = ObservableWeights::new(m, norm.clone()).unwrap();
        let eps = [1e-1, 1e-2, 1e-3][trial as usize % 3];
        let nf = norm.to_f64();
        let t = effective_rank_observable(k, eps, nf, Some(r));
        let cfg = ObservableConfig {
            k,
            t,
            noise: MomentNoise::ThresholdSigns {
                plain_bound: theorem_threshold(k, t, eps, ThresholdVariant::ObservableStrict { inf_norm: nf }),
                mixed_bound: eps / 4.0,
                seed: rng.next_u64(),
            },
        };
        let est = run_algorithm2(&s, &w, &cfg).unwrap();
        let exact = observable_power_sums(&s, &w, k).unwrap();
        let err = max_abs_error(&est.series, &exact).to_f64();
        worst_ratio = worst_ratio.max(err / eps);
        if err > eps {
            violations += 1;
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("100 pairs, k = 64, {violations} violations, worst error/ε {worst_ratio:.3}"),
    }
}

fn algorithm3_equivalence() -> Outcome {
    let mut rng = moment_rng(1006, 0);
    let mut mismatches = 0;
    let trials = 40;
    for _ in 0..trials {
        let (r1, r2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let n = r1.max(r2);
        let full = random_doubly_stochastic(n, 3, &mut rng);
        let overlap: Vec<Vec<Rational>> = full[..r1].iter().map(|row| row[..r2].to_vec()).collect();
        let pair =
            StatePair::new(random_spectrum(r1, &mut rng), random_spectrum(r2, &mut rng), overlap).unwrap();
        let grid = run_algorithm3(&pair, &PairConfig::new(16, 16, 0.1).with_t(n)).unwrap();
        for i in 1..=16u32 {
            for j in 1..=16u32 {
                if *grid.entry(i as usize, j as usize) != cross_trace(&pair, i, j).unwrap() {
                    mismatches += 1;
                }
            }
        }
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("{trials} pairs, 16 x 16 grids, {mismatches} mismatched entries"),
    }
}

fn bisect(mut lo: f64, mut hi: f64, above: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn entanglement_detection() -> Outcome {
    let bell = exact_pt_moments(&RationalMatrix::werner(&Rational::from(1)), 2, 2, 4).unwrap();
    let exact = detect_entanglement_exact(&bell, 4).unwrap();
    let bell_ok = exact.e[3] == Rational::from((-1, 4)) && exact.verdict.witness() == Some(3);

    let flip = bisect(0.0, 1.0, |w| detect_state(&DenseHermitian::werner(w).unwrap(), 2, 2).unwrap().verdict.is_entangled());
    let eig_flip = bisect(0.0, 1.0, |w| {
        let pt = partial_transpose(&DenseHermitian::werner(w).unwrap(), 2, 2).unwrap();
        *hermitian_eigenvalues(&pt).unwrap().last().unwrap() < 0.0
    });
    let flip_ok = (flip - 1.0 / 3.0).abs() <= 1e-6 && (eig_flip - 1.0 / 3.0).abs() <= 1e-6;

    let mut rng = moment_rng(1007, 0);
    let states: Vec<_> = (0..1000).map(|_| DenseHermitian::random_density(4, &mut rng).unwrap()).collect();
    let results = detect_batch(&states, 2, 2).unwrap();
    let disagree = results.iter().filter(|(a, b)| a.verdict.is_entangled() != b.verdict.is_entangled()).count();
    let entangled = results.iter().filter(|(a, _)| a.verdict.is_entangled()).count();
    Outcome {
        pass: bell_ok && flip_ok && disagree == 0,
        detail: format!(
            "Bell e_3 = {}, Werner flip at {flip:.9} (spectrum {eig_flip:.9}), 1000 states: {entangled} entangled, {disagree} disagreements",
            exact.e[3]
        ),
    }
}

fn esp_bound() -> Outcome {
    let mut rng = moment_rng(1008, 0);
    let mut violations = 0;
    let mut uniform_ok = true;
    for r in 2..=16usize {
        let bounds: Vec<Rational> = (0..=r).map(|t| if t == 0 { Rational::from(1) } else { esp_max_bound(t, r).unwrap() }).collect();
        for _ in 0..10_000 {
            let s = random_spectrum(r, &mut rng);
            let mut e = vec![Rational::new(); r + 1];
            e[0] = Rational::from(1);
            for (n, p) in s.eigenvalues().iter().enumerate() {
                for k in (1..=n + 1).rev() {
                    let add = Rational::from(&e[k - 1] * p);
                    e[k] += add;
                }
            }
            violations += (1..=r).filter(|&t| e[t] > bounds[t]).count();
        }
        let u = Spectrum::uniform(r).unwrap();
        let a = newton_girard(&power_sums(&u, r), r).unwrap();
        uniform_ok &= (1..=r).all(|t| a.get(t).unwrap() == &bounds[t]);
    }
    Outcome {
        pass: violations == 0 && uniform_ok,
        detail: format!("150000 spectra, {violations} violations, uniform equality {uniform_ok}"),
    }
}

fn applications_oracles() -> Outcome {
    use rug::ops::Pow;
    let mut rng = moment_rng(1009, 0);
    let mut mismatches = 0;
    for _ in 0..500 {
        let r = rng.random_range(1..=16);
        let s = random_spectrum(r, &mut rng);
        let deg = rng.random_range(1..=24);
        let series = power_sums(&s, 25);

        let q = deg;
        let brute: Rational = (1..=q as u32)
            .map(|i| {
                s.eigenvalues()
                    .iter()
                    .map(|p| Rational::from(p - 1u32).pow(i) * p)
                    .sum::<Rational>()
            })
            .sum();
        if gibbs_cost(&series, q).unwrap() != brute {
            mismatches += 1;
        }

        let coeffs: Vec<Rational> =
            (0..=deg).map(|_| Rational::from((rng.random_range(-50i64..=50), rng.random_range(1i64..=20)))).collect();
        let poly = PolynomialSpec::new(coeffs);
        let brute: Rational = s.eigenvalues().iter().map(|p| poly.eval(p)).sum();
        if nonlinear_trace(&poly, &series, r).unwrap() != brute {
            mismatches += 1;
        }
    }
    Outcome { pass: mismatches == 0, detail: format!("500 spectra, degree and q up to 24, {mismatches} mismatches") }
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Duration, Check); 9] = [
        ("exact extension at t = r", Duration::from_secs(10), exactness_at_rank),
        ("perturbation bound on symmetric polynomials", Duration::from_secs(30), lemma1_perturbation),
        ("truncation bound and t = 8 error", Duration::from_secs(10), lemma2_scenario2),
        ("sampled estimator over the full grid", Duration::from_secs(15 * 60), scenario1_grid),
        ("observable estimator under threshold noise", Duration::from_secs(30), theorem3_contract),
        ("two-state grid equals cross traces", Duration::from_secs(30), algorithm3_equivalence),
        ("partial-transpose entanglement detection", Duration::from_secs(60), entanglement_detection),
        ("elementary symmetric maximum at uniform", Duration::from_secs(60), esp_bound),
        ("Gibbs cost and polynomial trace oracles", Duration::from_secs(30), applications_oracles),
    ];
    let mut failed = 0;
    for (n, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *limit;
        failed += usize::from(!pass);
        println!(
            "[{}] {}. {name}: {} ({:.2}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            n + 1,
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
