use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use magspec_bench::pilot_fixture;
use magspec_core::branches::{solve_point, BranchSpec, TraceSettings};
use magspec_core::eigensolve::eigen_lowest_k;
use magspec_core::ids::band_function;
use magspec_core::oracle2d::{build_2d, count_below_2d, Box2D};
use magspec_core::perturbation;
use magspec_core::{ModelParams, Potential};

fn sturm(c: &mut Criterion) {
    let op = pilot_fixture(2, 1, 3.0, 8.0, 2000);
    c.bench_function("sturm_lowest_4_n2000", |b| {
        b.iter(|| eigen_lowest_k(black_box(&op), 4, 1e-12).unwrap())
    });
}

fn branch_point(c: &mut Criterion) {
    let spec = BranchSpec::pilot(3, 1);
    let settings = TraceSettings::default();
    c.bench_function("solve_point_nu3_l1", |b| {
        b.iter(|| solve_point(&spec, black_box(5.0), 4, &settings).unwrap())
    });
}

fn exact_omega2(c: &mut Criterion) {
    c.bench_function("perturbation_nu5_l3", |b| {
        b.iter(|| perturbation::compute(black_box(5), black_box(3)).unwrap())
    });
}

fn fiber_band(c: &mut Criterion) {
    let p = ModelParams::model(2, 1, 100.0, 0.1, Potential::constant(1.0));
    c.bench_function("band_function_nu2", |b| {
        b.iter(|| band_function(&p, 0.0, black_box(0.3), 0).unwrap())
    });
}

fn oracle_count(c: &mut Criterion) {
    let p = ModelParams::model(2, 1, 100.0, 0.1, Potential::constant(1.0));
    let bx = Box2D {
        x1: (-0.3, 0.3),
        x2: (0.0, 0.4),
        n1: 90,
        n2: 60,
    };
    let m = build_2d(&p, &bx, 100_000).unwrap();
    let mut g = c.benchmark_group("oracle2d");
    g.sample_size(10);
    g.bench_function("count_90x60", |b| {
        b.iter(|| count_below_2d(black_box(&m), 0.0).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    sturm,
    branch_point,
    exact_omega2,
    fiber_band,
    oracle_count
);
criterion_main!(benches);
