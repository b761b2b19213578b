#[path = "../tests/common/mod.rs"]
mod common;

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qoeshare::optimizer::{brute_force_oracle, solve_region_approx, solve_region_exact, RegionProblem};
use qoeshare::parallel::{map_jobs, Execution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instances(n: usize, ops: usize, max_clients: usize, max_t: u32) -> Vec<RegionProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n).map(|_| common::random_problem(&mut rng, ops, max_clients, max_t)).collect()
}

fn single_solve(c: &mut Criterion) {
    let tiny = instances(64, 2, 3, 4);
    let mut group = c.benchmark_group("region_solve");
    group.bench_function("exact", |b| {
        b.iter(|| tiny.iter().map(|p| solve_region_exact(black_box(p)).unwrap().objective_value).sum::<f64>())
    });
    group.bench_function("greedy", |b| {
        b.iter(|| tiny.iter().map(|p| solve_region_approx(black_box(p)).objective_value).sum::<f64>())
    });
    group.bench_function("brute_force", |b| {
        b.iter(|| tiny.iter().map(|p| brute_force_oracle(black_box(p)).unwrap().objective_value).sum::<f64>())
    });
    group.finish();
}

fn batch(c: &mut Criterion) {
    let big = instances(256, 2, 12, 20);
    let mut group = c.benchmark_group("exact_batch");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| map_jobs(exec, &big, |p| solve_region_exact(p).unwrap().objective_value))
        });
    }
    group.finish();
}

criterion_group!(benches, single_solve, batch);
criterion_main!(benches);
