use criterion::{criterion_group, criterion_main, Criterion};
use eventsampling_core::bm::{deterministic_policy, delta_recursion, optimal_envelope_recursion, OptimizerConfig};
use eventsampling_core::sim::{poisson_demo, simulate_hitting_statistics, simulate_policy};
use eventsampling_core::{ProcessModel, SeriesConfig, SimConfig};

fn policies(c: &mut Criterion) {
    let model = ProcessModel::brownian(1.0).unwrap();
    let cfg = SimConfig::new(2_000, 1e-3, 7);
    let delta = delta_recursion(1.0, 3, &SeriesConfig::default(), &OptimizerConfig::default())
        .unwrap()
        .policy;
    let mut g = c.benchmark_group("simulate_2000_paths");
    g.sample_size(10);
    g.bench_function("uniform/N=3", |b| {
        let p = deterministic_policy(1.0, 3).unwrap().policy;
        b.iter(|| simulate_policy(&model, &p, &cfg))
    });
    g.bench_function("envelope/N=3", |b| {
        let p = optimal_envelope_recursion(1.0, 3).unwrap().policy;
        b.iter(|| simulate_policy(&model, &p, &cfg))
    });
    g.bench_function("delta/N=3", |b| b.iter(|| simulate_policy(&model, &delta, &cfg)));
    let ou = ProcessModel::ornstein_uhlenbeck(-1.0, 1.0).unwrap();
    g.bench_function("ou_uniform/N=3", |b| {
        let p = deterministic_policy(1.0, 3).unwrap().policy;
        b.iter(|| simulate_policy(&ou, &p, &cfg))
    });
    g.finish();
}

fn oracles(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracles");
    g.sample_size(10);
    g.bench_function("hitting_stats/2000", |b| {
        b.iter(|| simulate_hitting_statistics(1.0, 1.0, 1.0, &SimConfig::new(2_000, 1e-3, 3)))
    });
    g.bench_function("poisson_demo/10000", |b| b.iter(|| poisson_demo(2.0, 5.0, &SimConfig::new(10_000, 1e-2, 3))));
    g.finish();
}

criterion_group!(benches, policies, oracles);
criterion_main!(benches);
