use birsym_bench::{cyclic_system, SIZES};
use birsym_core::hecke::hecke_matrix;
use birsym_core::linalg::integer::IntegerQuotient;
use birsym_core::linalg::modp::rank_mod_p;
use birsym_core::relations::{build_relations, full_kset};
use birsym_core::{AbelianGroup, Flavor};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const P: u32 = 1_000_003;

fn relation_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("relation_build");
    for (order, n) in SIZES {
        let g = AbelianGroup::cyclic(order).unwrap();
        group.bench_with_input(BenchmarkId::new("B", format!("N{order}_n{n}")), &(g, n), |b, (g, n)| {
            b.iter(|| build_relations(g, *n, Flavor::B, &full_kset(*n)).unwrap())
        });
    }
    group.finish();
}

fn rank_mod_prime(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_mod_p");
    group.sample_size(10);
    for (order, n) in SIZES {
        let rel = cyclic_system(order, n, Flavor::B);
        group.bench_with_input(BenchmarkId::new("B", format!("N{order}_n{n}")), &rel, |b, rel| {
            b.iter(|| rank_mod_p(rel.matrix(), P).unwrap())
        });
    }
    group.finish();
}

fn integer_normal_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("integer_normal_form");
    group.sample_size(10);
    for order in [13u32, 23, 37] {
        let rel = cyclic_system(order, 2, Flavor::B);
        group.bench_with_input(BenchmarkId::new("B2", order), &rel, |b, rel| {
            b.iter(|| IntegerQuotient::new(rel.matrix()).unwrap())
        });
    }
    group.finish();
}

fn hecke(c: &mut Criterion) {
    let mut group = c.benchmark_group("hecke_matrix");
    group.sample_size(10);
    for (order, n, ell) in [(11u32, 2usize, 2u64), (11, 2, 3), (7, 3, 2)] {
        let g = AbelianGroup::cyclic(order).unwrap();
        group.bench_function(format!("M{n}_N{order}_T{ell}"), |b| {
            b.iter(|| hecke_matrix(&g, n, ell, 1, Flavor::M).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, relation_build, rank_mod_prime, integer_normal_form, hecke);
criterion_main!(benches);
