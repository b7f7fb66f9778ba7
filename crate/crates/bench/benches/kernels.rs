//! Microbenchmarks for the numeric kernels on the hot path: scalar inner
//! maximizations, the log-expectation quadrature, and one full exponent
//! evaluation (multiplier minimization included).

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lqlift_core::exponents::i_sec;
use lqlift_core::gauss_expect::{e_plain, log_e_exp};
use lqlift_core::inner_max::{max_plus, max_q_half, max_weak_support, ScalarProblem};
use lqlift_core::sphere::i_sph;
use lqlift_core::QuadratureSpec;

fn inner_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("inner_max");
    g.bench_function("q_half_cubic", |b| {
        b.iter(|| max_q_half(black_box(&ScalarProblem::plus(1.3, 0.5, 0.7, 1.9))))
    });
    g.bench_function("generic_q_newton", |b| {
        b.iter(|| max_plus(black_box(&ScalarProblem::plus(1.3, 0.37, 0.7, 1.9))))
    });
    g.bench_function("weak_shifted", |b| {
        b.iter(|| max_weak_support(black_box(0.8), 0.5, 0.7, 1.9, 1.5))
    });
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    // Linear growth with a kink at the origin: exercises folding, the
    // inflation ladder, and kink isolation without inner-max overhead.
    let m = |h: f64| (1.5 * h, 0u8);
    let mut g = c.benchmark_group("gauss_expect");
    g.bench_function("log_e_exp_verified", |b| {
        b.iter(|| log_e_exp(black_box(2.0), m, true, &spec).unwrap())
    });
    g.bench_function("e_plain", |b| {
        b.iter(|| e_plain(|h| (h.abs(), 0u8), false, &spec).unwrap())
    });
    g.finish();
}

fn exponents(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let mut g = c.benchmark_group("exponents");
    g.sample_size(10);
    g.bench_function("i_sec_q_half", |b| {
        b.iter(|| i_sec(black_box(2.0), 0.25, 0.5, &spec).unwrap())
    });
    g.bench_function("i_sph", |b| b.iter(|| i_sph(black_box(2.0), 0.5)));
    g.finish();
}

criterion_group!(benches, inner_kernels, quadrature, exponents);
criterion_main!(benches);
