//! End-to-end benchmarks: one full certification condition and one coarse
//! threshold solve. Sample counts are small — each iteration runs seconds
//! of quadrature-heavy optimization.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lqlift_core::exponents::condition;
use lqlift_core::threshold::solve_beta;
use lqlift_core::{LiftMode, ProblemKind, QuadratureSpec};

fn conditions(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut g = c.benchmark_group("condition");
    g.sample_size(10);
    g.bench_function("sectional_lifted", |b| {
        b.iter(|| {
            condition(
                ProblemKind::Sectional,
                black_box(0.5),
                0.2,
                0.5,
                LiftMode::Lifted,
                (1e-3, 1e3),
                &spec,
            )
            .unwrap()
        })
    });
    g.bench_function("weak_limit_q1", |b| {
        b.iter(|| {
            condition(
                ProblemKind::Weak,
                black_box(0.5),
                0.3,
                1.0,
                LiftMode::Limit,
                (1e-3, 1e3),
                &spec,
            )
            .unwrap()
        })
    });
    g.finish();
}

fn thresholds(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut g = c.benchmark_group("solve_beta");
    g.sample_size(10);
    g.bench_function("sectional_limit_coarse", |b| {
        b.iter(|| {
            solve_beta(
                ProblemKind::Sectional,
                black_box(0.5),
                0.5,
                LiftMode::Limit,
                1e-2,
                (1e-3, 1e3),
                &spec,
            )
            .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, conditions, thresholds);
criterion_main!(benches);
