use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use iforge_core::dimension::{analytic_jacobian, manifold_rank};
use iforge_core::linalg::{ginibre, seeded_rng};
use iforge_core::{determinant, permanent, Species};

fn permanents(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    group.sample_size(10);
    for n in [8, 12, 16, 20] {
        let a = ginibre(n, n, &mut seeded_rng(n as u64));
        group.bench_with_input(BenchmarkId::new("ryser", n), &a, |b, a| b.iter(|| permanent(black_box(a)).unwrap()));
    }
    group.finish();

    let a = ginibre(20, 20, &mut seeded_rng(1));
    c.bench_function("determinant/20", |b| b.iter(|| determinant(black_box(&a)).unwrap()));
}

fn jacobians(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobian");
    group.sample_size(10);
    for (d, n) in [(2, 6), (3, 5), (5, 5)] {
        let w = ginibre(n, d * n, &mut seeded_rng(7));
        for species in [Species::Boson, Species::Fermion] {
            group.bench_function(format!("{species}/d{d}/N{n}"), |b| {
                b.iter(|| analytic_jacobian(black_box(&w), species, d, n).unwrap())
            });
        }
    }
    group.bench_function("manifold_rank/fermion/d5/N5", |b| {
        b.iter(|| manifold_rank(5, 5, Species::Fermion, 1, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, permanents, jacobians);
criterion_main!(benches);
