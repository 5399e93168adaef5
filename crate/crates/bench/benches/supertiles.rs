use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use subtile::geometry::realize_supertile;
use subtile::spectral::ParallelogramIndicators;
use subtile::{twisted_supertile_bruteforce, twisted_supertile_integral};
use subtile_bench::kenyon_114;

fn supertiles(c: &mut Criterion) {
    let sys = kenyon_114();
    let shape = sys.default_shape.clone();
    let psi = ParallelogramIndicators::new(&sys, &shape).expect("parallelogram prototiles");
    let lam = [0.31, -0.72];

    let mut group = c.benchmark_group("expand_supertile");
    for n in [4, 8, 10] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| sys.expand_supertile(black_box(0), n).expect("within caps"))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("realize_supertile");
    group.sample_size(20);
    for n in [6, 9] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| realize_supertile(&sys, &shape, black_box(0), n).expect("within caps"))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("twisted");
    for n in [4, 8] {
        group.bench_with_input(BenchmarkId::new("fast", n), &n, |b, &n| {
            b.iter(|| twisted_supertile_integral(&sys, &shape, black_box(&lam), 0, n, &psi))
        });
        group.bench_with_input(BenchmarkId::new("brute", n), &n, |b, &n| {
            b.iter(|| twisted_supertile_bruteforce(&sys, &shape, black_box(&lam), 0, n, &psi).expect("within caps"))
        });
    }
    group.finish();
}

criterion_group!(benches, supertiles);
criterion_main!(benches);
