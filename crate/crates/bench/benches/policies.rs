use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eventsampling_core::bm::{delta_recursion, envelope_coefficients, OptimizerConfig};
use eventsampling_core::ou::{ou_delta_distortion, ou_dp_optimal, GridSpec};
use eventsampling_core::series::{phi, psi};
use eventsampling_core::{LambdaParam, SeriesConfig};

fn series(c: &mut Criterion) {
    let cfg = SeriesConfig::default();
    let mut g = c.benchmark_group("series");
    for lam in [0.05, 1.4, 50.0] {
        let l = LambdaParam::new(lam).unwrap();
        g.bench_with_input(BenchmarkId::new("phi", lam), &l, |b, &l| b.iter(|| phi(black_box(l), &cfg)));
        g.bench_with_input(BenchmarkId::new("psi", lam), &l, |b, &l| b.iter(|| psi(black_box(l), &cfg)));
    }
    g.finish();
}

fn bm_recursions(c: &mut Criterion) {
    let cfg = SeriesConfig::default();
    let opt = OptimizerConfig::default();
    let mut g = c.benchmark_group("bm");
    for n in [1, 5, 50] {
        g.bench_with_input(BenchmarkId::new("delta_recursion", n), &n, |b, &n| {
            b.iter(|| delta_recursion(1.0, n, &cfg, &opt))
        });
    }
    g.bench_function("envelope_coefficients/200", |b| b.iter(|| envelope_coefficients(black_box(200))));
    g.finish();
}

fn ou_solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("ou");
    g.sample_size(10);
    let coarse = GridSpec {
        m_time: 400,
        x_half_width: 5.0,
        n_x: 201,
    };
    g.bench_function("delta_distortion/400x201", |b| b.iter(|| ou_delta_distortion(-1.0, black_box(0.9), &coarse)));
    g.bench_function("delta_distortion/default", |b| {
        b.iter(|| ou_delta_distortion(-1.0, black_box(0.9), &GridSpec::pde_default()))
    });
    g.bench_function("dp_optimal/N=2", |b| b.iter(|| ou_dp_optimal(-1.0, 1.0, 2, &GridSpec::dp_default(-1.0))));
    g.finish();
}

criterion_group!(benches, series, bm_recursions, ou_solvers);
criterion_main!(benches);
