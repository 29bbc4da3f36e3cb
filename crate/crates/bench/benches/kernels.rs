use std::hint::black_box;

use coarselab::cyclic::{chi, random_tensor};
use coarselab::fill::fill_chain;
use coarselab::opalg::{mu_profile, op_norm, random_banded, DEFAULT_TOL};
use coarselab::ufchain::random_chain;
use coarselab::WindowSpec;
use criterion::{criterion_group, criterion_main, Criterion};

fn operators(c: &mut Criterion) {
    let window = WindowSpec::zd(1, 32, 16).build().unwrap();
    let a = random_banded(&window, 1, 3, 0.6, 1);
    c.bench_function("op_norm/z1_W32_prop3", |b| b.iter(|| op_norm(black_box(&a), DEFAULT_TOL).unwrap()));
    c.bench_function("mu_profile/z1_W32_rmax8", |b| b.iter(|| mu_profile(black_box(&a), 8).unwrap()));
    let plane = WindowSpec::zd(2, 16, 8).build().unwrap();
    let p = random_banded(&plane, 2, 2, 0.6, 1);
    c.bench_function("op_norm/z2_W16_prop2", |b| b.iter(|| op_norm(black_box(&p), DEFAULT_TOL).unwrap()));
}

fn character(c: &mut Criterion) {
    let line = WindowSpec::zd(1, 32, 12).build().unwrap();
    let t1 = random_tensor(&line, 2, 2, &[2], 3).unwrap();
    c.bench_function("chi/z1_W32_degree2", |b| b.iter(|| chi(black_box(&t1)).unwrap()));
    let plane = WindowSpec::zd(2, 32, 12).build().unwrap();
    let t2 = random_tensor(&plane, 1, 2, &[2], 4).unwrap();
    c.bench_function("chi/z2_W32_degree1", |b| b.iter(|| chi(black_box(&t2)).unwrap()));
}

fn filling(c: &mut Criterion) {
    let plane = WindowSpec::zd(2, 24, 4).build().unwrap();
    let edges = random_chain(&plane, 1, 40, 8, 0, 5).unwrap();
    let triangles = random_chain(&plane, 2, 40, 8, 0, 6).unwrap();
    c.bench_function("fill/z2_degree1_40_terms", |b| b.iter(|| fill_chain(black_box(&edges)).unwrap()));
    c.bench_function("fill/z2_degree2_40_terms", |b| b.iter(|| fill_chain(black_box(&triangles)).unwrap()));
}

criterion_group!(benches, operators, character, filling);
criterion_main!(benches);
