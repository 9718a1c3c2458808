use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pretrends_bench::passing_bundle;
use pretrends_core::estimators::analyze;
use pretrends_core::gaussian::{solve_tn_mean, tn_cdf, ExtReal, TruncatedNormalSpec};
use pretrends_core::simulation::{replicate, SimConfig, TableId};

fn truncated_normal(c: &mut Criterion) {
    let spec = TruncatedNormalSpec::new(0.3, 0.016, ExtReal::Finite(-0.4), ExtReal::Finite(0.6)).unwrap();
    c.bench_function("tn_cdf", |b| b.iter(|| tn_cdf(black_box(&spec), black_box(0.1))));
    c.bench_function("solve_tn_mean", |b| {
        b.iter(|| {
            solve_tn_mean(black_box(0.1), 0.016, ExtReal::Finite(-0.4), ExtReal::Finite(0.6), black_box(0.975))
        })
    });
}

fn inference(c: &mut Criterion) {
    for k in [1, 5] {
        let bundle = passing_bundle(k);
        c.bench_function(&format!("analyze_k{k}"), |b| b.iter(|| analyze(black_box(&bundle), 0.05, 0.05, 1)));
    }
}

fn simulation(c: &mut Criterion) {
    let config = SimConfig { trend_slope: 0.065, ..SimConfig::default() };
    c.bench_function("replication_table4", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            replicate(black_box(&config), TableId::Four, i)
        })
    });
}

criterion_group!(benches, truncated_normal, inference, simulation);
criterion_main!(benches);
