//! Closed-form certification conditions in the `q -> 0` counting regime.
//!
//! Under the counting convention (`|w|^0 = 1` for `w != 0`) the
//! per-coordinate maxima have explicit values, the Gaussian expectations
//! reduce to `erf`/`erfc` expressions, and the sectional/strong conditions
//! collapse to two-parameter closed forms. With free parameters
//! `b in (0, 1/2)` (the quadratic tilt; `gamma = c3/(4b)`) and
//! `nu_g >= 0` (the squared magnitude threshold separating "kept at zero"
//! from "worth paying the counting fee"):
//!
//! ```text
//! E(b, nu_g) = exp(-b nu_g) / sqrt(1-2b) * erfc(sqrt((1-2b) nu_g / 2))
//!            + erf(sqrt(nu_g / 2))
//!
//! sectional: -beta/(2 c3) ln(alpha/c3^2) + b nu_g beta / c3
//!            + c3 (1-2b)/(4b) + (1/c3) ln E(b, nu_g) + I_sph(c3, alpha) < 0
//!
//! strong:    2 b nu_g beta / c3
//!            + c3 (1-2b)/(4b) + (1/c3) ln E(b, nu_g) + I_sph(c3, alpha) < 0
//! ```
//!
//! `E(b, nu_g)` is exactly `E exp(c3 max(0, h^2/(4 gamma) - nu))` at
//! `gamma = c3/(4b)`, `nu = b nu_g / c3` — the counting-regime minus form.
//! The substitution `1 - 2b = alpha/c3^2`, `nu_g = ln(c3^2/alpha)` seeds
//! the optimizer; the condition holds for *some* `(b, nu_g)`, so any
//! parameter choice with a negative value certifies.
//!
//! The threshold ceiling is `beta = alpha/2`: past it the counting mass on
//! the support alone exceeds what the measurement count can pay for, and
//! no parameter choice goes negative.

use crate::exponents::ProblemKind;
use crate::optim::{golden_section_min, nelder_mead_multistart, NelderMeadOpts};
use crate::specfun::{erf, ln_erfc};
use crate::sphere::i_sph;
use crate::{Error, Result};

/// `ln E(b, nu_g)` of the module header, evaluated in log space so large
/// `nu_g` (the relevant regime for large `c3`) stays accurate.
pub fn ln_counting_expectation(b: f64, nu_g: f64) -> f64 {
    debug_assert!(b > 0.0 && b < 0.5 && nu_g >= 0.0);
    let tail =
        -b * nu_g - 0.5 * (1.0 - 2.0 * b).ln() + ln_erfc(((1.0 - 2.0 * b) * nu_g / 2.0).sqrt());
    let bulk = erf((nu_g / 2.0).sqrt()).ln();
    // log(exp(tail) + exp(bulk)) without overflow.
    let m = tail.max(bulk);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((tail - m).exp() + (bulk - m).exp()).ln()
}

/// Sectional counting-regime condition value at explicit parameters.
pub fn q0_sectional_value(alpha: f64, beta: f64, c3: f64, b: f64, nu_g: f64) -> f64 {
    -beta / (2.0 * c3) * (alpha / (c3 * c3)).ln()
        + b * nu_g * beta / c3
        + c3 * (1.0 - 2.0 * b) / (4.0 * b)
        + ln_counting_expectation(b, nu_g) / c3
        + i_sph(c3, alpha)
}

/// Strong counting-regime condition value at explicit parameters.
pub fn q0_strong_value(alpha: f64, beta: f64, c3: f64, b: f64, nu_g: f64) -> f64 {
    2.0 * b * nu_g * beta / c3
        + c3 * (1.0 - 2.0 * b) / (4.0 * b)
        + ln_counting_expectation(b, nu_g) / c3
        + i_sph(c3, alpha)
}

/// Best (most negative) condition value found over `(b, nu_g)` at one `c3`.
#[derive(Debug, Clone, Copy)]
pub struct Q0Eval {
    pub value: f64,
    pub c3: f64,
    pub b: f64,
    pub nu_g: f64,
}

fn q0_value(kind: ProblemKind, alpha: f64, beta: f64, c3: f64, b: f64, nu_g: f64) -> f64 {
    match kind {
        ProblemKind::Sectional => q0_sectional_value(alpha, beta, c3, b, nu_g),
        ProblemKind::Strong => q0_strong_value(alpha, beta, c3, b, nu_g),
        ProblemKind::Weak => f64::NAN,
    }
}

/// Minimize the condition over `(b, nu_g)` at fixed `c3`, seeded by the
/// substitution `1 - 2b = alpha/c3^2`, `nu_g = ln(c3^2/alpha)`.
pub fn q0_condition(kind: ProblemKind, alpha: f64, beta: f64, c3: f64) -> Result<Q0Eval> {
    if kind == ProblemKind::Weak {
        return Err(Error::InvalidInput(
            "counting-regime closed form covers sectional and strong only".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0) || !(c3 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "q0 condition needs alpha, beta in (0,1) and c3 > 0, got ({alpha}, {beta}, {c3})"
        )));
    }
    // b = sigmoid(s)/2 keeps b in (0, 1/2); nu_g = v^2.
    let obj = |x: &[f64]| -> f64 {
        let b = 0.5 / (1.0 + (-x[0]).exp());
        let nu_g = x[1] * x[1];
        if !(b > 0.0 && b < 0.5) {
            return f64::INFINITY;
        }
        q0_value(kind, alpha, beta, c3, b, nu_g)
    };

    let mut seeds: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![2.0, 2.0]];
    if c3 * c3 > alpha * 1.0001 {
        // Substitution seed: s = ln(2b/(1-2b)) with 1-2b = alpha/c3^2.
        let s0 = (c3 * c3 / alpha - 1.0).ln();
        let v0 = (c3 * c3 / alpha).ln().sqrt();
        seeds.insert(0, vec![s0, v0]);
        seeds.push(vec![s0 - 1.0, (v0 - 0.5).max(0.1)]);
    }
    let opts = NelderMeadOpts {
        initial_step: 0.25,
        max_iter: 400,
        ..Default::default()
    };
    let r = nelder_mead_multistart(obj, &seeds, &opts);
    Ok(Q0Eval {
        value: r.value,
        c3,
        b: 0.5 / (1.0 + (-r.x[0]).exp()),
        nu_g: r.x[1] * r.x[1],
    })
}

/// Minimize the condition over `c3 in (0, c3_max]` (log-spaced scan plus
/// golden refinement) and `(b, nu_g)`.
pub fn q0_condition_best(
    kind: ProblemKind,
    alpha: f64,
    beta: f64,
    c3_max: f64,
) -> Result<Q0Eval> {
    if !(c3_max > 1.0) {
        return Err(Error::InvalidInput(format!(
            "c3_max must exceed 1, got {c3_max}"
        )));
    }
    let lo = alpha.sqrt().max(0.05);
    let xs: Vec<f64> = {
        let (llo, lhi) = (lo.ln(), c3_max.ln());
        (0..25)
            .map(|i| (llo + (lhi - llo) * i as f64 / 24.0).exp())
            .collect()
    };
    let mut best: Option<Q0Eval> = None;
    for &c3 in &xs {
        let e = q0_condition(kind, alpha, beta, c3)?;
        if best.map_or(true, |b| e.value < b.value) {
            best = Some(e);
        }
    }
    let mut best = best.expect("nonempty scan");
    // Golden refinement in ln(c3) around the scan winner.
    let i = xs
        .iter()
        .position(|&c| c == best.c3)
        .unwrap_or(xs.len() - 1);
    let (llo, lhi) = (
        xs[i.saturating_sub(1)].ln(),
        xs[(i + 1).min(xs.len() - 1)].ln(),
    );
    if lhi > llo {
        let mut track_err: Option<Error> = None;
        {
            let track_err = &mut track_err;
            let best_cell = std::cell::RefCell::new(&mut best);
            golden_section_min(
                |lc| match q0_condition(kind, alpha, beta, lc.exp()) {
                    Ok(e) => {
                        let mut b = best_cell.borrow_mut();
                        if e.value < b.value {
                            **b = e;
                        }
                        e.value
                    }
                    Err(err) => {
                        *track_err = Some(err);
                        f64::INFINITY
                    }
                },
                llo,
                lhi,
                1e-4,
                16,
            );
        }
        if let Some(e) = track_err {
            return Err(e);
        }
    }
    Ok(best)
}

/// Counting-regime threshold and its diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Q0Threshold {
    /// Largest certified `beta` found (bisection, certified lower end).
    pub beta: f64,
    /// Distance below the `alpha/2` ceiling.
    pub ceiling_margin: f64,
    /// Condition value at the certified end (negative).
    pub condition_residual: f64,
    pub c3: f64,
    pub b: f64,
    pub nu_g: f64,
    /// Set when even the bottom of the bracket failed to certify.
    pub bracket_degenerate: bool,
}

/// Bisection threshold for the counting-regime condition. The bracket top
/// is the `alpha/2` ceiling, which never certifies.
pub fn q0_threshold(
    kind: ProblemKind,
    alpha: f64,
    c3_max: f64,
    beta_tol: f64,
) -> Result<Q0Threshold> {
    if !(beta_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "beta tolerance must be positive, got {beta_tol}"
        )));
    }
    let mut lo = 1e-4;
    let mut hi = alpha / 2.0;
    let e_lo = q0_condition_best(kind, alpha, lo, c3_max)?;
    if e_lo.value >= 0.0 {
        return Ok(Q0Threshold {
            beta: 0.0,
            ceiling_margin: alpha / 2.0,
            condition_residual: e_lo.value,
            c3: e_lo.c3,
            b: e_lo.b,
            nu_g: e_lo.nu_g,
            bracket_degenerate: true,
        });
    }
    let mut cert = e_lo;
    let mut cert_beta = lo;
    for _ in 0..60 {
        if hi - lo <= beta_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let e = q0_condition_best(kind, alpha, mid, c3_max)?;
        if e.value < 0.0 {
            lo = mid;
            cert = e;
            cert_beta = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Q0Threshold {
        beta: cert_beta,
        ceiling_margin: alpha / 2.0 - cert_beta,
        condition_residual: cert.value,
        c3: cert.c3,
        b: cert.b,
        nu_g: cert.nu_g,
        bracket_degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_expect::{log_e_exp, QuadratureSpec};
    use crate::inner_max::best_minus;
    use approx::assert_relative_eq;

    #[test]
    fn counting_expectation_matches_quadrature() {
        // ln E(b, nu_g) must equal log E exp(c3 max(0, h^2/(4 gamma) - nu))
        // at gamma = c3/(4b), nu = b nu_g / c3 — computed by the generic
        // quadrature layer over the counting-regime minus form.
        let spec = QuadratureSpec::default();
        for &(b, nu_g) in &[(0.2, 1.0), (0.35, 4.0), (0.45, 9.0), (0.05, 0.3)] {
            let c3 = 1.3;
            let gamma = c3 / (4.0 * b);
            let nu = b * nu_g / c3;
            let m = move |h: f64| {
                let r = best_minus(h, 0.0, nu, gamma);
                (r.value, r.marker())
            };
            let got = log_e_exp(c3, m, true, &spec).unwrap();
            assert!(got.finite);
            let want = ln_counting_expectation(b, nu_g);
            assert_relative_eq!(got.log_value, want, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn expectation_limits() {
        // nu_g = 0 removes the threshold: E = E exp(b h^2) = 1/sqrt(1-2b).
        let b = 0.3;
        assert_relative_eq!(
            ln_counting_expectation(b, 0.0),
            -0.5 * (1.0 - 2.0 * b).ln(),
            epsilon = 1e-12
        );
        // Huge nu_g kills the tail term: E -> 1.
        assert!(ln_counting_expectation(0.3, 1e4).abs() < 1e-12);
    }

    #[test]
    fn strong_needs_more_measurements_than_sectional() {
        // At equal beta the strong condition value dominates the sectional
        // one (its support term doubles and the sectional form subtracts
        // the logarithm), so its threshold is no larger.
        let (alpha, c3_max) = (0.5, 100.0);
        let sec = q0_threshold(ProblemKind::Sectional, alpha, c3_max, 1e-3).unwrap();
        let stro = q0_threshold(ProblemKind::Strong, alpha, c3_max, 1e-3).unwrap();
        assert!(!sec.bracket_degenerate && !stro.bracket_degenerate);
        assert!(stro.beta <= sec.beta + 1e-3);
        assert!(sec.beta < alpha / 2.0);
        assert!(sec.condition_residual < 0.0);
    }

    #[test]
    fn threshold_grows_with_c3_budget() {
        let alpha = 0.5;
        let t_small = q0_threshold(ProblemKind::Sectional, alpha, 10.0, 1e-3).unwrap();
        let t_large = q0_threshold(ProblemKind::Sectional, alpha, 1e4, 1e-3).unwrap();
        assert!(t_large.beta >= t_small.beta - 1e-3);
        // With a generous budget the threshold should be well past half of
        // the ceiling (the asymptote is the ceiling itself).
        assert!(t_large.beta > alpha / 4.0);
    }

    #[test]
    fn weak_kind_is_rejected() {
        assert!(q0_condition(ProblemKind::Weak, 0.5, 0.2, 10.0).is_err());
    }
}
