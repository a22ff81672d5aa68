use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hdmetrics::grouped::{Bandwidth, GroupSpec, SemimetricKind};
use hdmetrics::homogeneity::{exact_power_mc, homogeneity_test, PowerParams};
use hdmetrics::independence::dependence_test;
use hdmetrics::metrics::resolve_bandwidths;
use hdmetrics::ustat::{dcov_sq_unbiased, pairwise_distances, u_center};
use hdmetrics_bench::{normal_sample, unit_metric};

fn bench_pairwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise_distances");
    for &(n, p) in &[(100usize, 100usize), (100, 1000), (500, 100)] {
        let sample = normal_sample(n, p, 1);
        let grouped = unit_metric(SemimetricKind::Euclidean, &sample);
        group.bench_with_input(
            BenchmarkId::new("groupwise_euclidean", format!("n{n}_p{p}")),
            &sample,
            |b, s| b.iter(|| pairwise_distances(black_box(s), &grouped).unwrap()),
        );
        let whole = {
            let g = GroupSpec::single_group(p, SemimetricKind::SquaredEuclidean, 0.5).unwrap();
            resolve_bandwidths(&g, &sample).unwrap()
        };
        group.bench_with_input(
            BenchmarkId::new("euclidean", format!("n{n}_p{p}")),
            &sample,
            |b, s| b.iter(|| pairwise_distances(black_box(s), &whole).unwrap()),
        );
    }
    group.finish();
}

fn bench_centering(c: &mut Criterion) {
    let mut group = c.benchmark_group("u_statistics");
    for &n in &[100usize, 500] {
        let sample = normal_sample(n, 50, 2);
        let metric = unit_metric(SemimetricKind::Euclidean, &sample);
        let d = pairwise_distances(&sample, &metric).unwrap();
        group.bench_with_input(BenchmarkId::new("u_center", n), &d, |b, d| {
            b.iter(|| u_center(black_box(d)).unwrap())
        });
        let other = pairwise_distances(&normal_sample(n, 50, 3), &metric).unwrap();
        group.bench_with_input(BenchmarkId::new("dcov_sq", n), &d, |b, d| {
            b.iter(|| dcov_sq_unbiased(black_box(d), &other).unwrap())
        });
    }
    group.finish();
}

fn bench_tests(c: &mut Criterion) {
    let mut group = c.benchmark_group("tests");
    group.sample_size(20);
    let x = normal_sample(50, 50, 4);
    let y = normal_sample(50, 50, 5);
    for (label, kind) in [
        ("kd_euclid", SemimetricKind::Euclidean),
        (
            "kd_gauss",
            SemimetricKind::GaussianInduced {
                bandwidth: Bandwidth::Auto,
            },
        ),
    ] {
        let g = GroupSpec::unit_groups(50, kind).unwrap();
        group.bench_function(BenchmarkId::new("homogeneity", label), |b| {
            b.iter(|| homogeneity_test(black_box(&x), black_box(&y), &g, 0.1).unwrap())
        });
        group.bench_function(BenchmarkId::new("dependence", label), |b| {
            b.iter(|| dependence_test(black_box(&x), black_box(&y), &g, &g, 0.1).unwrap())
        });
    }
    group.finish();
}

fn bench_power(c: &mut Criterion) {
    let pp = PowerParams::new(1.0, 1.0, 1.0).unwrap();
    c.bench_function("exact_power_mc_10k", |b| {
        b.iter(|| exact_power_mc(&pp, black_box(0.3), 10, 10, 1.65, 10_000, 7).unwrap())
    });
}

criterion_group!(benches, bench_pairwise, bench_centering, bench_tests, bench_power);
criterion_main!(benches);
