use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tatesha_bench::{dense_poly, level};
use tatesha_core::lfun::{self, mul_kronecker, IntPoly};

fn kronecker(c: &mut Criterion) {
    let mut g = c.benchmark_group("poly_mul");
    for len in [64usize, 256, 1024] {
        let a = dense_poly(len, 256);
        let b = dense_poly(len, 256);
        g.bench_with_input(BenchmarkId::new("kronecker", len), &len, |bch, _| {
            bch.iter(|| mul_kronecker(black_box(&a), black_box(&b)))
        });
        if len <= 256 {
            let (pa, pb) = (IntPoly::new(a.clone()), IntPoly::new(b.clone()));
            g.bench_with_input(BenchmarkId::new("schoolbook", len), &len, |bch, _| {
                bch.iter(|| pa.mul_schoolbook(black_box(&pb)))
            });
        }
    }
    g.finish();
}

fn character_sums(c: &mut Criterion) {
    let lv = level(7, 2);
    let f = lv.field().clone();
    let alpha = f.generator();
    let mut g = c.benchmark_group("character_sums");
    g.bench_function("gauss_f49", |b| b.iter(|| lv.chars.gauss_sum(2, 1, black_box(alpha)).unwrap()));
    g.bench_function("kloosterman_f49", |b| b.iter(|| lv.chars.kloosterman_sum(2, black_box(alpha)).unwrap()));
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    for (q, a) in [(7u64, 2u32), (13, 1), (7, 3)] {
        let lv = level(q, a);
        g.bench_function(format!("classes_q{q}_a{a}"), |b| b.iter(|| lfun::class_polynomials(&lv).unwrap()));
        g.bench_function(format!("l_q{q}_a{a}"), |b| b.iter(|| lfun::l_polynomial(&lv).unwrap()));
    }
    g.finish();
}

fn roots(c: &mut Criterion) {
    let mut g = c.benchmark_group("aberth");
    g.sample_size(10);
    for (q, a) in [(7u64, 1u32), (7, 2)] {
        let l = lfun::l_polynomial(&level(q, a)).unwrap();
        g.bench_function(format!("unit_circle_q{q}_a{a}"), |b| {
            b.iter(|| lfun::unit_circle_roots(black_box(l.coeffs()), q, 256, 2048).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kronecker, character_sums, assembly, roots);
criterion_main!(benches);
