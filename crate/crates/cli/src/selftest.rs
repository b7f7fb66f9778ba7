//! `lqlift selftest`: replay the library's oracle cross-checks and print
//! a pass/fail table. Exits zero only if every check passes.
//!
//! The half-normal-MGF check computes its closed form through an
//! injectable error-function dependency; the hidden `--inject-fault erf`
//! flag swaps in a deliberately corrupted implementation so the table's
//! ability to catch a broken special function is itself testable.

use clap::{Args, ValueEnum};
use lqlift_core::exponents::{
    i_sec, i_str, i_weak, sec_objective, sec_objective_limit, str_objective, weak_objective,
    weak_objective_limit,
};
use lqlift_core::gauss_expect::{e_plain, log_e_exp};
use lqlift_core::inner_max::{max_minus, max_plus, max_q_half, ScalarProblem};
use lqlift_core::q0_closed::ln_counting_expectation;
use lqlift_core::sphere::{i_sph, i_sph_limit};
use lqlift_core::threshold::solve_beta;
use lqlift_core::{LiftMode, ProblemKind, QuadratureSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{worker_pool, CliError, CliResult};

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Run the quick subset (well under a minute).
    #[arg(long)]
    pub fast: bool,

    /// Deliberately corrupt a dependency to prove the table catches it
    /// (testing hook).
    #[arg(long, hide = true, value_enum)]
    pub inject_fault: Option<Fault>,

    /// Worker threads (default: one per logical core).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fault {
    /// Perturb the error function used by the closed-form oracles.
    Erf,
}

type ErfFn = fn(f64) -> f64;

/// Emulates a mistyped series coefficient: a smooth relative error far
/// above every oracle tolerance.
fn corrupted_erf(x: f64) -> f64 {
    lqlift_core::specfun::erf(x) * (1.0 + 3e-5)
}

fn spec64() -> QuadratureSpec {
    QuadratureSpec {
        node_count: 64,
        ..QuadratureSpec::default()
    }
}

/// `|i_sph(c3 -> 0, alpha) - (-sqrt(alpha))|` across the alpha range.
fn check_sphere_limit() -> Result<(), String> {
    for i in 1..=19 {
        let alpha = 0.05 * i as f64;
        let got = i_sph(1e-4, alpha);
        let want = i_sph_limit(alpha);
        if (got - want).abs() >= 1e-3 {
            return Err(format!(
                "i_sph(1e-4, {alpha}) = {got}, plain limit {want}"
            ));
        }
    }
    Ok(())
}

/// The explicit q = 1/2 maximizer against the generic search it bypasses.
fn check_cubic_vs_generic(draws: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..draws {
        let h = rng.gen_range(0.0..4.0);
        let nu = rng.gen_range(0.01..3.0);
        let gamma = rng.gen_range(0.05..5.0);
        let problems = [
            ScalarProblem::plus(h, 0.5, nu, gamma),
            ScalarProblem::minus(h, 0.5, nu, gamma),
        ];
        for p in &problems {
            let generic = match p.sign_mode {
                lqlift_core::inner_max::SignMode::Plus => max_plus(p),
                lqlift_core::inner_max::SignMode::Minus => max_minus(p),
            };
            let cubic = max_q_half(p);
            if (generic.value - cubic.value).abs() >= 1e-8 {
                return Err(format!(
                    "draw {i}: h={h} nu={nu} gamma={gamma} {:?}: generic {} vs cubic {}",
                    p.sign_mode, generic.value, cubic.value
                ));
            }
        }
    }
    Ok(())
}

/// Quadrature vs the half-normal MGF `E e^{t|h|} = 2 e^{t^2/2} Phi(t)`;
/// the closed form goes through the injectable error function.
fn check_half_normal_mgf(erf: ErfFn) -> Result<(), String> {
    let spec = spec64();
    for &t in &[0.1, 0.5, 1.0, 2.0] {
        let got = log_e_exp(t, |h: f64| (h, 0u8), true, &spec)
            .map_err(|e| e.to_string())?;
        if !got.finite {
            return Err(format!("t={t}: quadrature declared the MGF infinite"));
        }
        let phi = 0.5 * (1.0 + erf(t / std::f64::consts::SQRT_2));
        let want = std::f64::consts::LN_2 + 0.5 * t * t + phi.ln();
        if (got.log_value - want).abs() >= 1e-9 {
            return Err(format!(
                "t={t}: quadrature {} vs closed form {}",
                got.log_value, want
            ));
        }
    }
    Ok(())
}

/// Plain first moments: `E|h| = sqrt(2/pi)`, `E h^2 = 1`.
fn check_plain_moments() -> Result<(), String> {
    let spec = spec64();
    let e_abs = e_plain(|h: f64| (h, 0u8), true, &spec).map_err(|e| e.to_string())?;
    let want_abs = (2.0 / std::f64::consts::PI).sqrt();
    if (e_abs - want_abs).abs() >= 1e-10 {
        return Err(format!("E|h| = {e_abs}, want {want_abs}"));
    }
    let e_sq = e_plain(|h: f64| (h * h, 0u8), true, &spec).map_err(|e| e.to_string())?;
    if (e_sq - 1.0).abs() >= 1e-10 {
        return Err(format!("E h^2 = {e_sq}, want 1"));
    }
    Ok(())
}

/// Exponent assemblies at a tiny lift parameter against their plain
/// limits (the scaled log-expectations degenerate to plain expectations).
fn check_assembly_limits() -> Result<(), String> {
    let spec = spec64();
    let c3 = 1e-4;
    let (beta, q, gamma, nu) = (0.2, 0.5, 1.2, 0.8);
    let sec = sec_objective(c3, beta, q, gamma, nu, &spec).map_err(|e| e.to_string())?;
    let sec_lim = sec_objective_limit(beta, q, gamma, nu, &spec).map_err(|e| e.to_string())?;
    if (sec - sec_lim).abs() >= 1e-3 {
        return Err(format!("sectional: {sec} vs limit {sec_lim}"));
    }
    let strv =
        str_objective(c3, beta, q, gamma, nu, 0.4, &spec).map_err(|e| e.to_string())?;
    let str_lim = lqlift_core::exponents::str_objective_limit(beta, q, gamma, nu, 0.4, &spec)
        .map_err(|e| e.to_string())?;
    if (strv - str_lim).abs() >= 1e-3 {
        return Err(format!("strong: {strv} vs limit {str_lim}"));
    }
    let weak =
        weak_objective(c3, beta, q, 0.7, gamma, nu, &spec).map_err(|e| e.to_string())?;
    let weak_lim =
        weak_objective_limit(beta, q, 0.7, gamma, nu, &spec).map_err(|e| e.to_string())?;
    if (weak - weak_lim).abs() >= 1e-3 {
        return Err(format!("weak: {weak} vs limit {weak_lim}"));
    }
    Ok(())
}

/// Counting-regime closed-form expectation vs direct quadrature of the
/// maximizer it summarizes (parameter substitution `gamma = c3/(4b)`,
/// `nu = b nu_g / c3`).
fn check_counting_form() -> Result<(), String> {
    let spec = spec64();
    let c3 = 1.0;
    for &(b, nu_g) in &[(0.2, 0.5), (0.35, 2.0), (0.45, 4.0)] {
        let gamma = c3 / (4.0 * b);
        let nu = b * nu_g / c3;
        let quad = log_e_exp(
            c3,
            |h: f64| {
                let r = max_minus(&ScalarProblem::minus(h, 0.0, nu, gamma));
                (r.value, r.marker())
            },
            true,
            &spec,
        )
        .map_err(|e| e.to_string())?;
        let want = ln_counting_expectation(b, nu_g);
        if (quad.log_value - want).abs() >= 1e-9 {
            return Err(format!(
                "b={b} nu_g={nu_g}: quadrature {} vs closed form {want}",
                quad.log_value
            ));
        }
    }
    Ok(())
}

/// The nested minimizer against a dense multiplier grid (soundness: the
/// optimizer must never sit above the grid by more than the tolerance).
fn check_optimizer_vs_grid(fast: bool) -> Result<(), String> {
    let spec = spec64();
    let instances = if fast { 1 } else { 3 };
    let (steps2, steps3) = if fast { (70, 24) } else { (160, 48) };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in [ProblemKind::Sectional, ProblemKind::Weak, ProblemKind::Strong] {
        for inst in 0..instances {
            let c3 = rng.gen_range(0.3..2.5);
            let beta = rng.gen_range(0.05..0.35);
            let q = [0.3, 0.5, 0.7, 1.0][rng.gen_range(0..4)];
            let mu = rng.gen_range(0.0..2.0);
            let (opt, grid_min, tol) = match kind {
                ProblemKind::Sectional | ProblemKind::Weak => {
                    let opt = match kind {
                        ProblemKind::Sectional => i_sec(c3, beta, q, &spec),
                        _ => i_weak(c3, beta, q, mu, &spec),
                    }
                    .map_err(|e| e.to_string())?;
                    let mut best = f64::INFINITY;
                    for i in 0..steps2 {
                        let gamma = c3 / 2.0 + 1e-3
                            + (12.0 - c3 / 2.0) * i as f64 / (steps2 - 1) as f64;
                        for j in 0..steps2 {
                            let nu = 10.0 * j as f64 / (steps2 - 1) as f64;
                            let v = match kind {
                                ProblemKind::Sectional => {
                                    sec_objective(c3, beta, q, gamma, nu, &spec)
                                }
                                _ => weak_objective(c3, beta, q, mu, gamma, nu, &spec),
                            };
                            // Divergent cells are exactly the ones the
                            // optimizer treats as infeasible; skip them.
                            if let Ok(v) = v {
                                best = best.min(v);
                            }
                        }
                    }
                    (opt.value, best, 1e-4)
                }
                ProblemKind::Strong => {
                    let opt = i_str(c3, beta, q, &spec).map_err(|e| e.to_string())?;
                    let mut best = f64::INFINITY;
                    for i in 0..steps3 {
                        let gamma = c3 / 2.0 + 1e-3
                            + (10.0 - c3 / 2.0) * i as f64 / (steps3 - 1) as f64;
                        for j in 0..steps3 {
                            let nu1 = 6.0 * j as f64 / (steps3 - 1) as f64;
                            for l in 0..steps3 {
                                let nu2 = 4.0 * l as f64 / (steps3 - 1) as f64;
                                if let Ok(v) =
                                    str_objective(c3, beta, q, gamma, nu1, nu2, &spec)
                                {
                                    best = best.min(v);
                                }
                            }
                        }
                    }
                    (opt.value, best, 1e-3)
                }
            };
            if !grid_min.is_finite() {
                return Err(format!("{kind} instance {inst}: dense grid all-divergent"));
            }
            if opt > grid_min + tol {
                return Err(format!(
                    "{kind} instance {inst} (c3={c3:.3} beta={beta:.3} q={q}): \
                     optimizer {opt} above grid {grid_min}"
                ));
            }
        }
    }
    Ok(())
}

/// End-to-end threshold solve against a well-known reference point.
fn check_threshold_reference() -> Result<(), String> {
    let r = solve_beta(
        ProblemKind::Weak,
        0.5,
        1.0,
        LiftMode::Limit,
        1e-3,
        (1e-3, 1e3),
        &spec64(),
    )
    .map_err(|e| e.to_string())?;
    if (r.beta - 0.1928).abs() >= 0.01 {
        return Err(format!("weak q=1 limit threshold at alpha=0.5: {}", r.beta));
    }
    Ok(())
}

pub fn run(args: &SelftestArgs) -> CliResult {
    let erf: ErfFn = match args.inject_fault {
        Some(Fault::Erf) => corrupted_erf,
        None => lqlift_core::specfun::erf,
    };
    let fast = args.fast;
    let draws = if fast { 200 } else { 1000 };

    type Check = (&'static str, Box<dyn Fn() -> Result<(), String> + Send + Sync>);
    let mut checks: Vec<Check> = vec![
        ("sphere-exponent-plain-limit", Box::new(check_sphere_limit)),
        (
            "scalar-maximizer-cubic-vs-generic",
            Box::new(move || check_cubic_vs_generic(draws)),
        ),
        (
            "half-normal-mgf-vs-quadrature",
            Box::new(move || check_half_normal_mgf(erf)),
        ),
        ("plain-moments-vs-quadrature", Box::new(check_plain_moments)),
        ("exponent-assembly-plain-limit", Box::new(check_assembly_limits)),
        ("counting-form-vs-quadrature", Box::new(check_counting_form)),
        (
            "optimizer-vs-dense-grid",
            Box::new(move || check_optimizer_vs_grid(fast)),
        ),
    ];
    if !fast {
        checks.push((
            "threshold-reference-point",
            Box::new(check_threshold_reference),
        ));
    }

    let pool = worker_pool(args.jobs)?;
    let started = std::time::Instant::now();
    let mut failures = 0usize;
    println!("{:<36} {:<6} {:>9}", "check", "result", "seconds");
    for (name, check) in &checks {
        let t0 = std::time::Instant::now();
        let outcome = pool.install(|| check());
        let dt = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("{name:<36} {:<6} {dt:>9.2}", "pass"),
            Err(msg) => {
                failures += 1;
                println!("{name:<36} {:<6} {dt:>9.2}", "FAIL");
                println!("    {msg}");
            }
        }
    }
    let total = checks.len();
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "selftest: {}/{} passed ({elapsed:.1} s)",
        total - failures,
        total
    );
    if failures > 0 {
        return Err(CliError::Compute(format!(
            "selftest: {failures}/{total} checks failed"
        )));
    }
    Ok(())
}
