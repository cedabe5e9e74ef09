use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use optocool_core::{
    build_full_system, build_rwa_system, evolve, minimize_over_detuning, stability, steady_state, Model, MomentVector, PhysicalParams,
};

fn point() -> PhysicalParams {
    PhysicalParams::new(1.0, 0.5, 1e-5, -1.0, 0.2, 1e3).unwrap()
}

fn steady(c: &mut Criterion) {
    let full = build_full_system(&point());
    let rwa = build_rwa_system(&point());
    c.bench_function("steady_state/full", |b| b.iter(|| steady_state(black_box(&full)).unwrap()));
    c.bench_function("steady_state/rwa", |b| b.iter(|| steady_state(black_box(&rwa)).unwrap()));
    c.bench_function("stability/full", |b| b.iter(|| stability(black_box(&full)).unwrap()));
}

fn propagate(c: &mut Criterion) {
    let sys = build_full_system(&point());
    let mu0 = MomentVector::thermal(1e3);
    let grid: Vec<f64> = (0..=100).map(|i| i as f64).collect();
    c.bench_function("evolve/full_101_points", |b| {
        b.iter(|| evolve(black_box(&sys), &mu0, &grid).unwrap())
    });
}

fn optimize(c: &mut Criterion) {
    let base = point();
    let mut g = c.benchmark_group("minimize_over_detuning");
    g.sample_size(10);
    g.bench_function("rwa", |b| b.iter(|| minimize_over_detuning(black_box(&base), (-3.0, -0.1), Model::Rwa).unwrap()));
    g.bench_function("full", |b| b.iter(|| minimize_over_detuning(black_box(&base), (-3.0, -0.1), Model::Full).unwrap()));
    g.finish();
}

criterion_group!(benches, steady, propagate, optimize);
criterion_main!(benches);
