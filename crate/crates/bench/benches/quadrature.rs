use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use pshardy_bench::{boundary_norm, contour, lelong_jensen, riesz_norm};
use pshardy_core::quadrature::periodic_integrate;
use pshardy_core::Exhaustion;

fn periodic(c: &mut Criterion) {
    let g = |t: f64| (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, t)).norm().powf(-0.75);
    c.bench_function("periodic/power-singularity", |b| b.iter(|| periodic_integrate(g, black_box(&[0.0]), 1e-10)));
    let u = Exhaustion::truncated_series(16).unwrap();
    c.bench_function("periodic/truncated-series-norm", |b| b.iter(|| boundary_norm(black_box(&u))));
}

fn area(c: &mut Criterion) {
    let u = Exhaustion::mixed();
    let mut group = c.benchmark_group("area");
    group.sample_size(10);
    group.bench_function("riesz/mixed", |b| b.iter(|| riesz_norm(black_box(&u))));
    group.bench_function("lelong-jensen/mixed", |b| b.iter(|| lelong_jensen(black_box(&u), -0.01)));
    group.finish();
}

fn levelset(c: &mut Criterion) {
    let u = Exhaustion::green_atom(Complex64::new(0.5, 0.0)).unwrap();
    let mut group = c.benchmark_group("contour");
    group.sample_size(10);
    group.bench_function("grid-512", |b| b.iter(|| contour(black_box(&u), -0.05, 512)));
    group.finish();
}

criterion_group!(benches, periodic, area, levelset);
criterion_main!(benches);
