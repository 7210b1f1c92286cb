use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tracepow_bench::fixture;
use tracepow_core::estimation::{run_algorithm1, EstimationConfig, MomentOracle, SampleRule};
use tracepow_core::scenarios::DistributionTag;
use tracepow_core::{exact_trace_power, extend_series, newton_girard, power_sums, Rational};

fn recurrence(c: &mut Criterion) {
    let s = fixture(DistributionTag::Geometric, 16);
    let seed = power_sums(&s, 16);
    let coeffs = newton_girard(seed.values(), 16).unwrap();

    c.bench_function("newton_girard r=16", |b| b.iter(|| newton_girard(black_box(seed.values()), 16).unwrap()));

    let mut group = c.benchmark_group("extend_series");
    for k in [32usize, 64, 128, 256] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| extend_series(&coeffs, black_box(seed.values()), k).unwrap())
        });
    }
    group.finish();

    c.bench_function("power_sums k=256", |b| b.iter(|| power_sums(black_box(&s), 256)));
    c.bench_function("exact_trace_power k=256", |b| b.iter(|| exact_trace_power(black_box(&s), 256)));
}

fn estimator(c: &mut Criterion) {
    let s = fixture(DistributionTag::Arithmetic, 16);
    let mut group = c.benchmark_group("run_algorithm1");
    for k in [32usize, 256] {
        let cfg = EstimationConfig::new(k, Rational::from((1, 100)), 0.5, 8, 1)
            .unwrap()
            .with_samples(SampleRule::Scenario);
        group.bench_with_input(BenchmarkId::new("binomial", k), &cfg, |b, cfg| {
            b.iter(|| run_algorithm1(black_box(&s), cfg).unwrap())
        });
        let exact = cfg.clone().with_oracle(MomentOracle::Exact);
        group.bench_with_input(BenchmarkId::new("exact", k), &exact, |b, cfg| {
            b.iter(|| run_algorithm1(black_box(&s), cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, recurrence, estimator);
criterion_main!(benches);
