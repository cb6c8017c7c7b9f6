//! End-to-end solver benchmarks: lazy search on the two reference
//! topologies, the eager all-patterns oracle on a small problem, the pure
//! simplex feasibility check, and the network parser.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use relusat_bench::{deep_problem, medium_network_text, small_problem, wide_problem};
use relusat_core::oracle::oracle_solve;
use relusat_core::parse_network;
use relusat_core::search::{solve, SolveConfig};
use relusat_core::simplex::Tableau;

fn bench_lazy_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("lazy_solve");
    let config = SolveConfig::default();
    let deep = deep_problem();
    group.bench_function("deep_2x3x3x3x3x1", |b| {
        b.iter(|| solve(black_box(&deep), black_box(&config)))
    });
    let wide = wide_problem();
    group.bench_function("wide_2x12x1", |b| {
        b.iter(|| solve(black_box(&wide), black_box(&config)))
    });
    group.finish();
}

fn bench_lazy_vs_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("small_2x3x3x1");
    let config = SolveConfig::default();
    let problem = small_problem();
    group.bench_function("lazy", |b| {
        b.iter(|| solve(black_box(&problem), black_box(&config)))
    });
    group.bench_function("oracle_64_patterns", |b| {
        b.iter(|| oracle_solve(black_box(&problem), 10).unwrap())
    });
    group.finish();
}

fn bench_simplex(c: &mut Criterion) {
    let problem = deep_problem();
    c.bench_function("simplex_feasibility_deep_relaxation", |b| {
        b.iter(|| Tableau::new(black_box(&problem)).check_feasible())
    });
}

fn bench_parse(c: &mut Criterion) {
    let text = medium_network_text();
    c.bench_function("parse_network_3x30x30x30x3", |b| {
        b.iter(|| parse_network(black_box(&text)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_lazy_solve,
    bench_lazy_vs_oracle,
    bench_simplex,
    bench_parse
);
criterion_main!(benches);
