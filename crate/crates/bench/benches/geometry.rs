//! Geometry kernel benchmarks: both smallest-enclosing-ball routes across
//! cloud sizes and dimensions.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use myopic_bench::cloud_points;
use myopic_core::geometry::smallest_enclosing_ball_brute_force;
use myopic_core::smallest_enclosing_ball;

fn bench_seb(c: &mut Criterion) {
    let mut group = c.benchmark_group("seb");
    for dimension in [2_usize, 3] {
        for n in [8_usize, 64, 512, 4096] {
            let points = cloud_points(n, dimension, 1.0, 42);
            group.throughput(Throughput::Elements(n as u64));
            group.bench_with_input(
                BenchmarkId::new(format!("welzl-d{dimension}"), n),
                &points,
                |b, points| b.iter(|| smallest_enclosing_ball(black_box(points)).unwrap()),
            );
        }
    }
    group.finish();
}

fn bench_seb_brute_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("seb-brute");
    for n in [6_usize, 10, 14] {
        let points = cloud_points(n, 2, 1.0, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &points, |b, points| {
            b.iter(|| smallest_enclosing_ball_brute_force(black_box(points)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_seb, bench_seb_brute_force);
criterion_main!(benches);
