//! Temporary timing probe (not part of the deliverable).

use lqlift_core::exponents::{condition, i_weak, LiftMode, ProblemKind};
use lqlift_core::gauss_expect::{log_e_exp, QuadratureSpec};
use lqlift_core::inner_max::max_weak_support;
use std::time::Instant;

fn main() {
    let spec = QuadratureSpec::default();
    let (alpha, beta, q) = (0.5, 0.15, 0.5);

    // Layer 1: one quadrature call (weak on-support integrand).
    let f = |h: f64| {
        let r = max_weak_support(h, q, 0.6, 1.1, 0.7);
        (r.value, r.marker())
    };
    let t = Instant::now();
    let reps = 200;
    let mut acc = 0.0;
    for _ in 0..reps {
        acc += log_e_exp(1.0, &f, false, &spec).unwrap().log_value;
    }
    println!(
        "log_e_exp (weak support, 256 nodes): {:.3} ms/call   (acc {acc:.3})",
        t.elapsed().as_secs_f64() * 1e3 / reps as f64
    );

    // Layer 2: one cold multiplier minimization.
    let t = Instant::now();
    let e = i_weak(1.0, beta, q, 0.7, &spec).unwrap();
    println!(
        "i_weak cold: {:.3} s  (value {:.6}, gamma {:.4}, nu {:.4})",
        t.elapsed().as_secs_f64(),
        e.value,
        e.argmin.gamma,
        e.argmin.nu1
    );

    // Layer 3: full condition evaluations.
    for kind in [ProblemKind::Weak, ProblemKind::Sectional, ProblemKind::Strong] {
        let t = Instant::now();
        let c = condition(kind, alpha, beta, q, LiftMode::Lifted, (1e-3, 1e3), &spec).unwrap();
        println!(
            "condition {kind} lifted: {:.2} s  (value {:.6}, c3* {:.4}, mu* {:.3})",
            t.elapsed().as_secs_f64(),
            c.value,
            c.params.c3,
            c.params.mu
        );
    }
    let t = Instant::now();
    let c = condition(ProblemKind::Weak, alpha, beta, q, LiftMode::Limit, (1e-3, 1e3), &spec)
        .unwrap();
    println!(
        "condition weak limit: {:.2} s  (value {:.6}, mu* {:.3})",
        t.elapsed().as_secs_f64(),
        c.value,
        c.params.mu
    );

    // Layer 4: full threshold solves at default settings.
    for (kind, mode) in [
        (ProblemKind::Weak, LiftMode::Lifted),
        (ProblemKind::Weak, LiftMode::Limit),
        (ProblemKind::Sectional, LiftMode::Lifted),
        (ProblemKind::Strong, LiftMode::Lifted),
    ] {
        let t = Instant::now();
        let r = lqlift_core::threshold::solve_beta(kind, alpha, q, mode, 1e-4, (1e-3, 1e3), &spec)
            .unwrap();
        println!(
            "solve_beta {kind} {mode}: {:.1} s  (beta {:.6}, flags {:?})",
            t.elapsed().as_secs_f64(),
            r.beta,
            r.flags
        );
    }
}
