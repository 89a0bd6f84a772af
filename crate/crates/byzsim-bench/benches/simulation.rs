use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use byzsim_bench::{k_bounded_setup, spread_configuration};
use byzsim_core::algorithm::{compute_destination, TrimmedMidrange};
use byzsim_core::analysis::{check_cautious, check_diameter_monotone};
use byzsim_core::engine::run;
use byzsim_core::state::observed_snapshot;
use byzsim_core::Scalar;

fn bench_destination(c: &mut Criterion) {
    let mut group = c.benchmark_group("destination");
    for n in [5usize, 12, 48] {
        let config = spread_configuration(n);
        let snapshot = observed_snapshot(&config);
        group.bench_with_input(BenchmarkId::from_parameter(n), &snapshot, |b, snapshot| {
            b.iter(|| compute_destination(black_box(snapshot), 1).unwrap());
        });
    }
    group.finish();
}

fn bench_k_bounded_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("k_bounded_run");
    group.sample_size(10);
    for n in [4usize, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let (initial, mut scheduler, mut adversary) = k_bounded_setup(n, 2);
                run(
                    black_box(&initial),
                    &mut scheduler,
                    &mut adversary,
                    &TrimmedMidrange,
                )
            });
        });
    }
    group.finish();
}

fn bench_checkers(c: &mut Criterion) {
    let (initial, mut scheduler, mut adversary) = k_bounded_setup(6, 2);
    let trace = run(&initial, &mut scheduler, &mut adversary, &TrimmedMidrange);
    let mut group = c.benchmark_group("checkers");
    group.bench_function("cautious", |b| {
        b.iter(|| check_cautious(black_box(&trace)));
    });
    group.bench_function("diameter_monotone", |b| {
        b.iter(|| check_diameter_monotone(black_box(&trace)));
    });
    group.finish();
}

fn bench_scalar_ops(c: &mut Criterion) {
    let a = Scalar::new(355, 113);
    let b_value = Scalar::new(-217, 4096);
    c.bench_function("scalar_add_mul", |b| {
        b.iter(|| {
            let sum = black_box(&a) + black_box(&b_value);
            black_box(&sum) * black_box(&a)
        });
    });
}

criterion_group!(
    benches,
    bench_destination,
    bench_k_bounded_run,
    bench_checkers,
    bench_scalar_ops
);
criterion_main!(benches);
