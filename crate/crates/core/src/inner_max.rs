//! Pointwise (per-coordinate) inner maximizations.
//!
//! Every exponent in this crate reduces to Gaussian expectations of scalar
//! maxima of the form
//!
//! ```text
//!   g(w) = h w + s * nu * w^q - gamma * w^2          over w >= 0,
//! ```
//!
//! with `s = +1` ("plus" form, off-support coordinates rewarded for growing)
//! or `s = -1` ("minus" form, penalized), plus two composite variants:
//! a sign-symmetrized form with a second multiplier (`max_strong`) and a
//! shifted form around an on-support magnitude `mu` (`max_weak_support`).
//!
//! The solvers are exact up to root-finding tolerance (~1e-14 relative):
//!
//! * `q = 1` and `q = 0` have closed forms.
//! * `q = 1/2` reduces to a depressed cubic in `s = sqrt(w)` solved by the
//!   trigonometric/Cardano formulas plus Newton polish (`max_q_half`).
//! * generic `0 < q < 1` uses the fact that the derivative
//!   `g'(w) = h + s q nu w^{q-1} - 2 gamma w` is strictly decreasing
//!   (plus form) or unimodal with its peak at the analytically known
//!   inflection point `w_infl = (q(1-q) nu / (2 gamma))^{1/(2-q)}`
//!   (minus form), so every stationary point is isolated by construction
//!   and found by guarded Newton/bisection. No stationary point can be
//!   missed — completeness is structural, not heuristic.
//!
//! Convention for `q = 0`: `|w|^0` counts support, i.e. it is `1` for
//! `w != 0` and `0` for `w = 0`. Maxima in this case are suprema; the
//! (measure-zero) configurations where the supremum is not attained return
//! the supremum value with the limiting maximizer location.
//!
//! Ties between candidates are broken toward the smaller `|w*|`, so the
//! reported maximizer is deterministic.

use crate::optim::newton_bisect_decreasing;

/// Sign of the `nu |w|^q` term in the scalar objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMode {
    /// `g(w) = h w + nu w^q - gamma w^2` (multiplier term rewards growth).
    Plus,
    /// `g(w) = h w - nu w^q - gamma w^2` (multiplier term penalizes growth).
    Minus,
}

/// Which analytic branch produced the maximizer. The discriminant doubles
/// as the branch marker used for kink isolation in quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Branch {
    /// Maximum at the boundary `w = 0` (or `t = 0` for the shifted form).
    AtZero = 0,
    /// Interior stationary point with positive coordinate.
    InteriorPos = 1,
    /// Interior stationary point with negative coordinate (sign-symmetrized
    /// and shifted forms only).
    InteriorNeg = 2,
}

/// One scalar maximization instance.
#[derive(Debug, Clone, Copy)]
pub struct ScalarProblem {
    /// Magnitude of the Gaussian coefficient, `|h| >= 0`.
    pub h_mag: f64,
    /// Sparsity exponent, `0 <= q <= 1`.
    pub q: f64,
    /// Nonnegative multiplier on the `|w|^q` term.
    pub nu: f64,
    /// Quadratic coefficient, `> 0`.
    pub gamma: f64,
    /// Sign of the multiplier term.
    pub sign_mode: SignMode,
    /// On-support magnitude for the shifted form (ignored elsewhere).
    pub mu: f64,
}

impl ScalarProblem {
    pub fn plus(h_mag: f64, q: f64, nu: f64, gamma: f64) -> Self {
        Self {
            h_mag,
            q,
            nu,
            gamma,
            sign_mode: SignMode::Plus,
            mu: 0.0,
        }
    }

    pub fn minus(h_mag: f64, q: f64, nu: f64, gamma: f64) -> Self {
        Self {
            h_mag,
            q,
            nu,
            gamma,
            sign_mode: SignMode::Minus,
            mu: 0.0,
        }
    }
}

/// Maximizer, value, and originating branch of one scalar problem.
#[derive(Debug, Clone, Copy)]
pub struct InnerMaxResult {
    /// Arg-max (signed for the symmetrized/shifted forms; the shifted form
    /// reports the offset `w* = t* - mu`).
    pub w_star: f64,
    /// Maximum objective value.
    pub value: f64,
    pub branch: Branch,
}

impl InnerMaxResult {
    fn at_zero() -> Self {
        Self {
            w_star: 0.0,
            value: 0.0,
            branch: Branch::AtZero,
        }
    }

    /// Branch marker for quadrature kink isolation.
    pub fn marker(&self) -> u8 {
        self.branch as u8
    }
}

const ROOT_X_TOL: f64 = 1e-14;
const ROOT_MAX_ITER: usize = 80;

fn debug_check_common(h: f64, q: f64, nu: f64, gamma: f64) {
    debug_assert!(h >= 0.0, "h_mag must be nonnegative");
    debug_assert!((0.0..=1.0).contains(&q), "q must lie in [0, 1]");
    debug_assert!(nu >= 0.0, "nu must be nonnegative");
    debug_assert!(gamma > 0.0, "gamma must be positive");
}

/// `nu = 0` degenerate case shared by both sign modes:
/// max of `h w - gamma w^2` over `w >= 0`.
fn parabola_max(h: f64, gamma: f64) -> InnerMaxResult {
    if h <= 0.0 {
        return InnerMaxResult::at_zero();
    }
    let w = h / (2.0 * gamma);
    InnerMaxResult {
        w_star: w,
        value: h * h / (4.0 * gamma),
        branch: Branch::InteriorPos,
    }
}

fn plus_closed_q1(h: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    let num = h + nu;
    if num <= 0.0 {
        return InnerMaxResult::at_zero();
    }
    InnerMaxResult {
        w_star: num / (2.0 * gamma),
        value: num * num / (4.0 * gamma),
        branch: Branch::InteriorPos,
    }
}

fn minus_closed_q1(h: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    if h <= nu {
        return InnerMaxResult::at_zero();
    }
    let num = h - nu;
    InnerMaxResult {
        w_star: num / (2.0 * gamma),
        value: num * num / (4.0 * gamma),
        branch: Branch::InteriorPos,
    }
}

/// `q = 0` plus form: sup over `w > 0` of `h w + nu - gamma w^2` versus the
/// boundary value `0`. The supremum `h^2/(4 gamma) + nu` always wins for
/// `nu > 0`; at `h = 0` it is approached as `w -> 0+` but not attained.
fn plus_closed_q0(h: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    if nu == 0.0 {
        return parabola_max(h, gamma);
    }
    let value = h * h / (4.0 * gamma) + nu;
    InnerMaxResult {
        w_star: h / (2.0 * gamma),
        value,
        branch: Branch::InteriorPos,
    }
}

fn minus_closed_q0(h: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    let interior = h * h / (4.0 * gamma) - nu;
    if interior > 0.0 {
        InnerMaxResult {
            w_star: h / (2.0 * gamma),
            value: interior,
            branch: Branch::InteriorPos,
        }
    } else {
        InnerMaxResult::at_zero()
    }
}

/// Generic plus form, `0 < q < 1`, `nu > 0`. The derivative
/// `d(w) = h + q nu w^{q-1} - 2 gamma w` falls strictly from `+inf` to
/// `-inf`, so there is a unique interior stationary point and it is the
/// global maximum over `w >= 0`.
fn plus_generic(h: f64, q: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    // At the root, 2 gamma w = h + q nu w^{q-1}; if w >= 1 then w^{q-1} <= 1,
    // so the root is bounded by max(1, (h + q nu)/(2 gamma)).
    let hi = (h + q * nu) / (2.0 * gamma);
    let hi = hi.max(1.0) + 1.0;
    let d = |w: f64| h + q * nu * w.powf(q - 1.0) - 2.0 * gamma * w;
    let dp = |w: f64| q * (q - 1.0) * nu * w.powf(q - 2.0) - 2.0 * gamma;
    let w = newton_bisect_decreasing(d, dp, 0.0, hi, ROOT_X_TOL, ROOT_MAX_ITER);
    InnerMaxResult {
        w_star: w,
        value: h * w + nu * w.powf(q) - gamma * w * w,
        branch: Branch::InteriorPos,
    }
}

/// Generic minus form, `0 < q < 1`, `nu > 0`. The derivative
/// `d(w) = h - q nu w^{q-1} - 2 gamma w` is `-inf` at both ends of
/// `(0, inf)` with a single interior peak at
/// `w_infl = (q (1-q) nu / (2 gamma))^{1/(2-q)}`; if `d(w_infl) <= 0` the
/// objective is decreasing everywhere and the boundary `w = 0` wins,
/// otherwise the larger of the two roots is the unique interior local
/// maximum, which is then compared against the boundary.
fn minus_generic(h: f64, q: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    let w_infl = (q * (1.0 - q) * nu / (2.0 * gamma)).powf(1.0 / (2.0 - q));
    let d = |w: f64| h - q * nu * w.powf(q - 1.0) - 2.0 * gamma * w;
    if d(w_infl) <= 0.0 {
        return InnerMaxResult::at_zero();
    }
    // The larger root satisfies 2 gamma w <= h.
    let hi = (h / (2.0 * gamma)).max(w_infl * 1.000_000_1) + 1.0;
    let dp = |w: f64| q * (1.0 - q) * nu * w.powf(q - 2.0) - 2.0 * gamma;
    let w = newton_bisect_decreasing(d, dp, w_infl, hi, ROOT_X_TOL, ROOT_MAX_ITER);
    let value = h * w - nu * w.powf(q) - gamma * w * w;
    if value > 0.0 {
        InnerMaxResult {
            w_star: w,
            value,
            branch: Branch::InteriorPos,
        }
    } else {
        InnerMaxResult::at_zero()
    }
}

/// Maximize `h w + nu w^q - gamma w^2` over `w >= 0`.
pub fn max_plus(p: &ScalarProblem) -> InnerMaxResult {
    let (h, q, nu, gamma) = (p.h_mag, p.q, p.nu, p.gamma);
    debug_check_common(h, q, nu, gamma);
    if nu == 0.0 {
        parabola_max(h, gamma)
    } else if q == 1.0 {
        plus_closed_q1(h, nu, gamma)
    } else if q == 0.0 {
        plus_closed_q0(h, nu, gamma)
    } else {
        plus_generic(h, q, nu, gamma)
    }
}

/// Maximize `h w - nu w^q - gamma w^2` over `w >= 0`.
pub fn max_minus(p: &ScalarProblem) -> InnerMaxResult {
    let (h, q, nu, gamma) = (p.h_mag, p.q, p.nu, p.gamma);
    debug_check_common(h, q, nu, gamma);
    if nu == 0.0 {
        parabola_max(h, gamma)
    } else if q == 1.0 {
        minus_closed_q1(h, nu, gamma)
    } else if q == 0.0 {
        minus_closed_q0(h, nu, gamma)
    } else {
        minus_generic(h, q, nu, gamma)
    }
}

/// All real roots of the depressed cubic `t^3 + p t + r = 0`,
/// Newton-polished. Uses the trigonometric form when all three roots are
/// real and a cancellation-safe Cardano form otherwise.
fn depressed_cubic_roots(p: f64, r: f64) -> Vec<f64> {
    let mut roots: Vec<f64> = Vec::with_capacity(3);
    let disc = -4.0 * p * p * p - 27.0 * r * r;
    if p == 0.0 && r == 0.0 {
        roots.push(0.0);
    } else if disc >= 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * r / (2.0 * p)) * (-3.0 / p).sqrt();
        let theta = arg.clamp(-1.0, 1.0).acos();
        for k in 0..3 {
            roots.push(m * ((theta - 2.0 * std::f64::consts::PI * f64::from(k)) / 3.0).cos());
        }
    } else {
        // One real root. Pick the larger-magnitude cube-root term first so
        // the partner comes from the stable product identity u v = -p/3.
        let dq = (r * r / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let u = if r <= 0.0 {
            (-r / 2.0 + dq).cbrt()
        } else {
            (-r / 2.0 - dq).cbrt()
        };
        let t = if u != 0.0 { u - p / (3.0 * u) } else { 0.0 };
        roots.push(t);
    }
    for t in roots.iter_mut() {
        for _ in 0..3 {
            let f = *t * *t * *t + p * *t + r;
            let df = 3.0 * *t * *t + p;
            if df.abs() > 1e-300 {
                *t -= f / df;
            }
        }
    }
    roots
}

/// Exact `q = 1/2` solver. Substituting `s = sqrt(w)` turns the stationary
/// condition into the depressed cubic `2 gamma s^3 - h s -/+ nu/2 = 0`
/// (minus sign for [`SignMode::Plus`]); every nonnegative root is evaluated
/// against the boundary `w = 0`.
pub fn max_q_half(p: &ScalarProblem) -> InnerMaxResult {
    let (h, nu, gamma) = (p.h_mag, p.nu, p.gamma);
    debug_check_common(h, 0.5, nu, gamma);
    if nu == 0.0 {
        return parabola_max(h, gamma);
    }
    let p_c = -h / (2.0 * gamma);
    let (r_c, sgn) = match p.sign_mode {
        SignMode::Plus => (-nu / (4.0 * gamma), 1.0),
        SignMode::Minus => (nu / (4.0 * gamma), -1.0),
    };
    let mut best = InnerMaxResult::at_zero();
    for s in depressed_cubic_roots(p_c, r_c) {
        if s <= 0.0 {
            continue;
        }
        let w = s * s;
        let value = h * w + sgn * nu * s - gamma * w * w;
        if value > best.value || (value == best.value && w < best.w_star) {
            best = InnerMaxResult {
                w_star: w,
                value,
                branch: Branch::InteriorPos,
            };
        }
    }
    best
}

/// Sign-mode-aware dispatch that routes `q = 1/2` to the cubic solver.
/// The public `max_plus`/`max_minus` keep the generic iterative path at
/// `q = 1/2` so the two can be compared against each other.
pub(crate) fn best_plus(h: f64, q: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    if q == 0.5 && nu != 0.0 {
        max_q_half(&ScalarProblem::plus(h, q, nu, gamma))
    } else {
        max_plus(&ScalarProblem::plus(h, q, nu, gamma))
    }
}

pub(crate) fn best_minus(h: f64, q: f64, nu: f64, gamma: f64) -> InnerMaxResult {
    if q == 0.5 && nu != 0.0 {
        max_q_half(&ScalarProblem::minus(h, q, nu, gamma))
    } else {
        max_minus(&ScalarProblem::minus(h, q, nu, gamma))
    }
}

/// Sign-symmetrized maximization with a second multiplier `nu2`:
///
/// ```text
///   max over b in {+1, -1}, w >= 0 of
///     h w - b nu1 w^q - gamma w^2 + b nu2
/// ```
///
/// The `b = +1` branch is the minus form plus `nu2`; the `b = -1` branch is
/// the plus form minus `nu2`. `p.nu` supplies `nu1`. The reported `w_star`
/// is signed by the winning branch (negative for `b = -1`).
pub fn max_strong(p: &ScalarProblem, nu2: f64) -> InnerMaxResult {
    debug_assert!(nu2 >= 0.0, "nu2 must be nonnegative");
    let r_pos = best_minus(p.h_mag, p.q, p.nu, p.gamma);
    let v_pos = r_pos.value + nu2;
    let r_neg = best_plus(p.h_mag, p.q, p.nu, p.gamma);
    let v_neg = r_neg.value - nu2;
    if v_pos > v_neg || (v_pos == v_neg && r_pos.w_star.abs() <= r_neg.w_star.abs()) {
        InnerMaxResult {
            w_star: r_pos.w_star,
            value: v_pos,
            branch: r_pos.branch,
        }
    } else {
        InnerMaxResult {
            w_star: -r_neg.w_star,
            value: v_neg,
            branch: Branch::InteriorNeg,
        }
    }
}

/// Shifted maximization around an on-support magnitude `mu >= 0`:
///
/// ```text
///   max over w in R of  J(w) = h w - nu (|mu + w|^q - mu^q) - gamma w^2,
/// ```
///
/// with *signed* Gaussian coefficient `h`. Writing `t = mu + w`, the value
/// is assembled from at most two candidates: the kink `t = 0` and one
/// interior stationary point on the side where the effective linear
/// coefficient `h_eff = h + 2 gamma mu` points (the radial derivative on
/// the other side is strictly negative, so no stationary point exists
/// there; the two sides cannot both carry one since their effective
/// coefficients have opposite signs).
pub fn max_weak_support(h: f64, q: f64, nu: f64, gamma: f64, mu: f64) -> InnerMaxResult {
    debug_assert!((0.0..=1.0).contains(&q), "q must lie in [0, 1]");
    debug_assert!(nu >= 0.0, "nu must be nonnegative");
    debug_assert!(gamma > 0.0, "gamma must be positive");
    debug_assert!(mu >= 0.0, "mu must be nonnegative");

    if nu == 0.0 {
        let w = h / (2.0 * gamma);
        let t = mu + w;
        let branch = if t > 0.0 {
            Branch::InteriorPos
        } else if t < 0.0 {
            Branch::InteriorNeg
        } else {
            Branch::AtZero
        };
        return InnerMaxResult {
            w_star: w,
            value: h * h / (4.0 * gamma),
            branch,
        };
    }
    if mu == 0.0 {
        // By symmetry the maximizer takes the sign of h and the problem is
        // exactly the minus form in |h|.
        let r = best_minus(h.abs(), q, nu, gamma);
        let branch = if r.w_star == 0.0 {
            Branch::AtZero
        } else if h > 0.0 {
            Branch::InteriorPos
        } else {
            Branch::InteriorNeg
        };
        return InnerMaxResult {
            w_star: if h >= 0.0 { r.w_star } else { -r.w_star },
            value: r.value,
            branch,
        };
    }

    let mu_q = if q == 0.0 { 1.0 } else { mu.powf(q) };
    let j_at = |t: f64| -> f64 {
        let w = t - mu;
        let tq = if q == 0.0 {
            if t == 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            t.abs().powf(q)
        };
        h * w - nu * (tq - mu_q) - gamma * w * w
    };

    // (t, J(t)) candidates; the kink t = 0 is always one.
    let mut cands: Vec<(f64, f64)> = vec![(0.0, j_at(0.0))];

    if q == 1.0 {
        let t_pos = mu + (h - nu) / (2.0 * gamma);
        if t_pos > 0.0 {
            cands.push((t_pos, j_at(t_pos)));
        }
        let t_neg = mu + (h + nu) / (2.0 * gamma);
        if t_neg < 0.0 {
            cands.push((t_neg, j_at(t_neg)));
        }
    } else if q == 0.0 {
        // Away from t = 0 the support penalty is the constant 0 (both
        // |t|^0 and mu^0 count one), leaving the free parabola. Supremum
        // convention if the vertex happens to sit exactly on t = 0.
        let t_free = mu + h / (2.0 * gamma);
        cands.push((t_free, h * h / (4.0 * gamma)));
    } else {
        let h_eff = h + 2.0 * gamma * mu;
        if h_eff != 0.0 {
            let ha = h_eff.abs();
            let side = h_eff.signum();
            // Stationary points in the radial coordinate rho = |t| on the
            // active side solve ha - q nu rho^{q-1} - 2 gamma rho = 0 —
            // the minus-form structure again.
            if q == 0.5 {
                for s in depressed_cubic_roots(-ha / (2.0 * gamma), nu / (4.0 * gamma)) {
                    if s > 0.0 {
                        let t = side * s * s;
                        cands.push((t, j_at(t)));
                    }
                }
            } else {
                let w_infl = (q * (1.0 - q) * nu / (2.0 * gamma)).powf(1.0 / (2.0 - q));
                let d = |rho: f64| ha - q * nu * rho.powf(q - 1.0) - 2.0 * gamma * rho;
                if d(w_infl) > 0.0 {
                    let hi = (ha / (2.0 * gamma)).max(w_infl * 1.000_000_1) + 1.0;
                    let dp = |rho: f64| q * (1.0 - q) * nu * rho.powf(q - 2.0) - 2.0 * gamma;
                    let rho = newton_bisect_decreasing(d, dp, w_infl, hi, ROOT_X_TOL, ROOT_MAX_ITER);
                    let t = side * rho;
                    cands.push((t, j_at(t)));
                }
            }
        }
    }

    let mut best = cands[0];
    for &(t, v) in &cands[1..] {
        if v > best.1 || (v == best.1 && (t - mu).abs() < (best.0 - mu).abs()) {
            best = (t, v);
        }
    }
    let (t, value) = best;
    let branch = if t > 0.0 {
        Branch::InteriorPos
    } else if t < 0.0 {
        Branch::InteriorNeg
    } else {
        Branch::AtZero
    };
    InnerMaxResult {
        w_star: t - mu,
        value,
        branch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force oracle: dense scan plus golden refinement of
    /// `f` over `[lo, hi]`, independent of the solver logic above.
    fn grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> (f64, f64) {
        let mut best_x = lo;
        let mut best_v = f(lo);
        for i in 1..=n {
            let x = lo + (hi - lo) * (i as f64) / (n as f64);
            let v = f(x);
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
        let step = (hi - lo) / (n as f64);
        let r = crate::optim::golden_section_min(
            |x| -f(x),
            (best_x - step).max(lo),
            (best_x + step).min(hi),
            1e-13,
            200,
        );
        if -r.value > best_v {
            (r.x, -r.value)
        } else {
            (best_x, best_v)
        }
    }

    #[test]
    fn plus_q1_closed_form() {
        let r = max_plus(&ScalarProblem::plus(1.0, 1.0, 0.5, 1.0));
        assert_relative_eq!(r.w_star, 0.75, epsilon = 1e-15);
        assert_relative_eq!(r.value, 0.5625, epsilon = 1e-15);
        assert_eq!(r.branch, Branch::InteriorPos);
    }

    #[test]
    fn minus_q1_closed_form() {
        let r = max_minus(&ScalarProblem::minus(1.0, 1.0, 0.5, 1.0));
        assert_relative_eq!(r.w_star, 0.25, epsilon = 1e-15);
        assert_relative_eq!(r.value, 0.0625, epsilon = 1e-15);
        let r0 = max_minus(&ScalarProblem::minus(0.5, 1.0, 0.5, 1.0));
        assert_eq!(r0.branch, Branch::AtZero);
        assert_eq!(r0.value, 0.0);
    }

    #[test]
    fn q0_support_counting_convention() {
        // plus: sup over w > 0 adds nu on top of the free parabola.
        let r = max_plus(&ScalarProblem::plus(1.0, 0.0, 0.5, 1.0));
        assert_relative_eq!(r.value, 0.75, epsilon = 1e-15);
        assert_relative_eq!(r.w_star, 0.5, epsilon = 1e-15);
        // plus with h = 0: supremum nu approached as w -> 0+.
        let r0 = max_plus(&ScalarProblem::plus(0.0, 0.0, 0.5, 1.0));
        assert_relative_eq!(r0.value, 0.5, epsilon = 1e-15);
        assert_eq!(r0.w_star, 0.0);
        // minus: pay nu to leave the origin.
        let rm = max_minus(&ScalarProblem::minus(1.0, 0.0, 0.1, 1.0));
        assert_relative_eq!(rm.value, 0.15, epsilon = 1e-15);
        let rm0 = max_minus(&ScalarProblem::minus(1.0, 0.0, 0.3, 1.0));
        assert_eq!(rm0.branch, Branch::AtZero);
    }

    #[test]
    fn q_half_cubic_matches_brute_force() {
        let cases = [
            (1.0, 0.5, 1.0),
            (0.3, 1.5, 0.7),
            (2.5, 0.05, 0.2),
            (0.0, 1.0, 1.0),
            (4.0, 3.0, 2.0),
        ];
        for &(h, nu, gamma) in &cases {
            for sign in [SignMode::Plus, SignMode::Minus] {
                let p = ScalarProblem {
                    h_mag: h,
                    q: 0.5,
                    nu,
                    gamma,
                    sign_mode: sign,
                    mu: 0.0,
                };
                let r = max_q_half(&p);
                let sgn = if sign == SignMode::Plus { 1.0 } else { -1.0 };
                let f = |w: f64| h * w + sgn * nu * w.sqrt() - gamma * w * w;
                let hi = (h + nu) / gamma + 2.0;
                let (_, v) = grid_max(f, 0.0, hi, 400_000);
                assert!(
                    (r.value - v).abs() <= 1e-9 * (1.0 + v.abs()),
                    "cubic {:?} h={h} nu={nu} gamma={gamma}: got {}, oracle {}",
                    sign,
                    r.value,
                    v
                );
            }
        }
    }

    #[test]
    fn q_half_nu0_reduces_to_parabola() {
        let p = ScalarProblem::plus(1.0, 0.5, 0.0, 1.0);
        let r = max_q_half(&p);
        assert_relative_eq!(r.value, 0.25, epsilon = 1e-15);
        assert_relative_eq!(r.w_star, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn generic_path_matches_brute_force() {
        let cases = [
            (1.0, 0.3, 0.5, 1.0),
            (1.0, 0.7, 0.5, 1.0),
            (0.2, 0.9, 2.0, 0.6),
            (3.0, 0.1, 1.0, 0.8),
            (0.0, 0.4, 1.0, 1.0),
            (1.5, 0.5, 0.8, 1.2), // generic path at q = 1/2 as well
        ];
        for &(h, q, nu, gamma) in &cases {
            let rp = max_plus(&ScalarProblem::plus(h, q, nu, gamma));
            let fp = |w: f64| {
                if w == 0.0 {
                    0.0
                } else {
                    h * w + nu * w.powf(q) - gamma * w * w
                }
            };
            let hi = (h + nu) / gamma + 2.0;
            let (_, vp) = grid_max(fp, 0.0, hi, 400_000);
            assert!(
                (rp.value - vp).abs() <= 1e-9 * (1.0 + vp.abs()),
                "plus h={h} q={q} nu={nu} gamma={gamma}: got {}, oracle {}",
                rp.value,
                vp
            );

            let rm = max_minus(&ScalarProblem::minus(h, q, nu, gamma));
            let fm = |w: f64| {
                if w == 0.0 {
                    0.0
                } else {
                    h * w - nu * w.powf(q) - gamma * w * w
                }
            };
            let (_, vm) = grid_max(fm, 0.0, hi, 400_000);
            assert!(
                (rm.value - vm).abs() <= 1e-9 * (1.0 + vm.abs()),
                "minus h={h} q={q} nu={nu} gamma={gamma}: got {}, oracle {}",
                rm.value,
                vm
            );
        }
    }

    #[test]
    fn strong_branch_selection() {
        // h=1, q=1, nu1=0.5, nu2=0.2: b=+1 gives 0.0625+0.2, b=-1 gives
        // 0.5625-0.2 -> the negative branch wins.
        let p = ScalarProblem::minus(1.0, 1.0, 0.5, 1.0);
        let r = max_strong(&p, 0.2);
        assert_relative_eq!(r.value, 0.3625, epsilon = 1e-15);
        assert_relative_eq!(r.w_star, -0.75, epsilon = 1e-15);
        assert_eq!(r.branch, Branch::InteriorNeg);
        // Large nu2 flips the winner to b = +1.
        let r2 = max_strong(&p, 0.4);
        assert_relative_eq!(r2.value, 0.4625, epsilon = 1e-15);
        assert_relative_eq!(r2.w_star, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn strong_nu2_zero_is_plus_value() {
        // With nu2 = 0 the b = -1 branch dominates (the multiplier helps).
        let p = ScalarProblem::minus(1.2, 0.7, 0.4, 0.9);
        let r = max_strong(&p, 0.0);
        let rp = max_plus(&ScalarProblem::plus(1.2, 0.7, 0.4, 0.9));
        assert_relative_eq!(r.value, rp.value, epsilon = 1e-14);
    }

    #[test]
    fn weak_mu_zero_matches_minus_form() {
        let r = max_weak_support(1.0, 1.0, 0.5, 1.0, 0.0);
        assert_relative_eq!(r.value, 0.0625, epsilon = 1e-15);
        assert_relative_eq!(r.w_star, 0.25, epsilon = 1e-15);
        let rneg = max_weak_support(-1.0, 1.0, 0.5, 1.0, 0.0);
        assert_relative_eq!(rneg.value, 0.0625, epsilon = 1e-15);
        assert_relative_eq!(rneg.w_star, -0.25, epsilon = 1e-15);
        assert_eq!(rneg.branch, Branch::InteriorNeg);
    }

    #[test]
    fn weak_zero_h_q0_stays_put() {
        // With h = 0 and q = 0 the support penalty is flat away from t = 0
        // and the quadratic pins the maximizer at w = 0.
        let r = max_weak_support(0.0, 0.0, 0.5, 1.0, 3.0);
        assert_eq!(r.w_star, 0.0);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn weak_q1_negative_side() {
        // h=-2, nu=0.5, gamma=1, mu=0.1: the t < 0 stationary point wins.
        let r = max_weak_support(-2.0, 1.0, 0.5, 1.0, 0.1);
        assert_relative_eq!(r.value, 0.6625, epsilon = 1e-14);
        assert_relative_eq!(r.w_star, -0.75, epsilon = 1e-14);
        assert_eq!(r.branch, Branch::InteriorNeg);
    }

    #[test]
    fn weak_matches_brute_force() {
        let cases = [
            (0.7, 0.3, 0.6, 1.0, 0.5),
            (-0.7, 0.3, 0.6, 1.0, 0.5),
            (1.8, 0.5, 1.2, 0.8, 2.0),
            (-3.5, 0.5, 1.2, 0.8, 1.0),
            (0.0, 0.9, 0.7, 1.0, 0.4),
            (2.0, 1.0, 0.5, 1.0, 1.5),
            (-1.0, 0.0, 0.3, 1.0, 0.7),
            (-4.0, 0.6, 0.9, 1.1, 1.3), // h_eff < 0 with interior q
        ];
        for &(h, q, nu, gamma, mu) in &cases {
            let r = max_weak_support(h, q, nu, gamma, mu);
            let mu_q = if q == 0.0 { 1.0 } else { mu.powf(q) };
            let j = |t: f64| {
                let w = t - mu;
                let tq = if q == 0.0 {
                    if t == 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    t.abs().powf(q)
                };
                h * w - nu * (tq - mu_q) - gamma * w * w
            };
            let span = (h.abs() + nu) / gamma + mu + 2.0;
            let (_, v) = grid_max(j, -span, span, 800_000);
            assert!(
                (r.value - v).abs() <= 1e-8 * (1.0 + v.abs()),
                "weak h={h} q={q} nu={nu} gamma={gamma} mu={mu}: got {}, oracle {}",
                r.value,
                v
            );
        }
    }

    #[test]
    fn plus_dominates_minus_and_zero() {
        for &(h, q, nu, gamma) in &[
            (0.5, 0.25, 0.7, 1.0),
            (2.0, 0.75, 0.1, 0.6),
            (0.0, 0.5, 1.0, 1.0),
        ] {
            let vp = max_plus(&ScalarProblem::plus(h, q, nu, gamma)).value;
            let vm = max_minus(&ScalarProblem::minus(h, q, nu, gamma)).value;
            assert!(vp >= vm);
            assert!(vp >= 0.0);
            assert!(vm >= 0.0);
        }
    }
}
