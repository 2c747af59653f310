//! Engine benchmarks: full synchronous runs on the standard configurations.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use myopic_bench::{chain_plan, cloud_plan, triangle_plan};
use myopic_core::StopReason;

fn bench_chain_gathering(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain-gather");
    for n in [8_usize, 32, 128] {
        let plan = chain_plan(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &plan, |b, plan| {
            b.iter(|| {
                let trace = black_box(plan).execute().unwrap();
                assert_eq!(trace.stop, StopReason::Gathered);
                trace
            })
        });
    }
    group.finish();
}

fn bench_cloud_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("cloud-50-rounds");
    for n in [16_usize, 64, 256] {
        let plan = cloud_plan(n, 50, 13);
        group.throughput(Throughput::Elements(n as u64 * 50));
        group.bench_with_input(BenchmarkId::from_parameter(n), &plan, |b, plan| {
            b.iter(|| black_box(plan).execute().unwrap())
        });
    }
    group.finish();
}

fn bench_triangle_livelock(c: &mut Criterion) {
    let plan = triangle_plan(40);
    c.bench_function("triangle-livelock-40", |b| {
        b.iter(|| {
            let trace = black_box(&plan).execute().unwrap();
            assert_ne!(trace.stop, StopReason::Gathered);
            trace
        })
    });
}

criterion_group!(
    benches,
    bench_chain_gathering,
    bench_cloud_rounds,
    bench_triangle_livelock
);
criterion_main!(benches);
