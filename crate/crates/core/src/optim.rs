//! Small, deterministic optimization toolkit: golden-section line search,
//! a hand-rolled Nelder–Mead simplex, and a guarded Newton/bisection root
//! finder for monotone scalar equations.
//!
//! All routines are fully deterministic (no RNG): restarts use fixed seed
//! points supplied by the caller, so repeated runs produce byte-identical
//! results regardless of thread count.

/// Invariant golden ratio constant `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a scalar minimization.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMin {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Runs until the bracket width drops below `tol` (absolute, in `x` units)
/// or `max_iter` shrink steps have been taken. On non-unimodal input it
/// still converges to *a* local minimum inside the bracket.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> ScalarMin {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        ScalarMin { x: x1, value: f1 }
    } else {
        ScalarMin { x: x2, value: f2 }
    }
}

/// Coarse scan over explicit abscissae followed by golden-section
/// refinement between the neighbours of the best scan point.
///
/// `xs` must be sorted ascending. Returns the refined minimum; ties in the
/// scan go to the smaller abscissa so results are order-deterministic.
pub fn scan_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    xs: &[f64],
    tol: f64,
    max_iter: usize,
) -> ScalarMin {
    assert!(!xs.is_empty());
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for (i, &v) in vals.iter().enumerate() {
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { xs[0] } else { xs[best_i - 1] };
    let hi = if best_i + 1 == xs.len() {
        xs[xs.len() - 1]
    } else {
        xs[best_i + 1]
    };
    if hi <= lo {
        return ScalarMin {
            x: xs[best_i],
            value: best_v,
        };
    }
    let refined = golden_section_min(&mut f, lo, hi, tol, max_iter);
    if refined.value <= best_v {
        refined
    } else {
        ScalarMin {
            x: xs[best_i],
            value: best_v,
        }
    }
}

/// Abscissa of the vertex of the parabola through three points, provided
/// the points are in strictly increasing `x` order and the parabola opens
/// upward (a genuine interior minimum). Returns `None` for degenerate or
/// concave configurations, and clamps nothing — callers bound the result.
pub fn parabola_vertex_min(
    x0: f64,
    f0: f64,
    x1: f64,
    f1: f64,
    x2: f64,
    f2: f64,
) -> Option<f64> {
    if !(x0 < x1 && x1 < x2) {
        return None;
    }
    // Divided differences: curvature must be positive.
    let d01 = (f1 - f0) / (x1 - x0);
    let d12 = (f2 - f1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv > 0.0) || !curv.is_finite() {
        return None;
    }
    // Vertex of the Newton-form quadratic.
    let v = 0.5 * (x0 + x1 - d01 / curv);
    v.is_finite().then_some(v)
}

/// Successive parabolic refinement of a bracketed minimum.
///
/// `(a, b, c)` must satisfy `a < b < c` with `f(b) <= min(f(a), f(c))`
/// (their values are passed in, already computed). Up to `max_iter`
/// further evaluations are spent tightening the bracket: each step probes
/// the vertex of the parabola through the current triple, demoted to a
/// golden split of the larger sub-interval whenever the parabola is
/// degenerate, its vertex leaves the interior, or the implied step fails
/// to undercut half the step before last — the classical stagnation guard,
/// without which a stale far endpoint drags the interpolation into linear
/// convergence. Stops early once the bracket is narrower than `x_tol`.
/// Returns the final best point.
pub fn parabolic_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: (f64, f64, f64),
    values: (f64, f64, f64),
    max_iter: usize,
    x_tol: f64,
) -> ScalarMin {
    let (mut a, mut b, mut c) = bracket;
    let (mut fa, mut fb, mut fc) = values;
    // Last and second-to-last accepted step sizes.
    let (mut d, mut e) = (c - a, c - a);
    for _ in 0..max_iter {
        if c - a <= x_tol || !fb.is_finite() {
            break;
        }
        let guard = 0.01 * (c - a);
        let x = match parabola_vertex_min(a, fa, b, fb, c, fc)
            .filter(|&v| v > a + guard && v < c - guard && (v - b).abs() < 0.5 * e)
        {
            // A vertex hugging the incumbent is nudged a minimum step away
            // (toward the larger side when exactly on top), so the bracket
            // keeps collapsing instead of re-probing `b`.
            Some(v) if (v - b).abs() < guard => {
                if v > b || (v == b && c - b >= b - a) {
                    b + guard
                } else {
                    b - guard
                }
            }
            Some(v) => v,
            None => {
                // Golden split of the larger sub-interval.
                if b - a >= c - b {
                    b - INV_PHI * (b - a)
                } else {
                    b + INV_PHI * (c - b)
                }
            }
        };
        e = d;
        d = (x - b).abs();
        let fx = f(x);
        if x < b {
            if fx <= fb {
                c = b;
                fc = fb;
                b = x;
                fb = fx;
            } else {
                a = x;
                fa = fx;
            }
        } else if fx <= fb {
            a = b;
            fa = fb;
            b = x;
            fb = fx;
        } else {
            c = x;
            fc = fx;
        }
    }
    ScalarMin { x: b, value: fb }
}

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOpts {
    /// Initial simplex edge length per coordinate.
    pub initial_step: f64,
    /// Stop when both the value spread and the simplex diameter fall
    /// below these tolerances.
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOpts {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            f_tol: 1e-11,
            x_tol: 1e-8,
            max_iter: 400,
        }
    }
}

/// Result of a Nelder–Mead run.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Classic Nelder–Mead downhill simplex (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2) with deterministic tie-breaking.
///
/// The objective may return `f64::INFINITY` to mark infeasible points;
/// the simplex simply retreats from them.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOpts,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n >= 1);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        // Order: best first. Stable sort keeps determinism on ties.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = ordered;
        values = ordered_vals;

        let spread = values[n] - values[0];
        let mut diam: f64 = 0.0;
        for v in &simplex[1..] {
            for j in 0..n {
                diam = diam.max((v[j] - simplex[0][j]).abs());
            }
        }
        if spread.abs() < opts.f_tol && diam < opts.x_tol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for j in 0..n {
                centroid[j] += v[j];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let lerp = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                .collect()
        };

        let xr = lerp(-1.0); // reflection
        let fr = f(&xr);
        if fr < values[0] {
            let xe = lerp(-2.0); // expansion
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            // Contraction: outside if the reflected point improved on the
            // worst vertex, inside otherwise.
            let (xc, fc) = if fr < values[n] {
                let xc = lerp(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = lerp(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0usize;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    NelderMeadResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
    }
}

/// Run Nelder–Mead from several seed points and keep the best result.
/// Seeds are visited in order, so the outcome is deterministic.
pub fn nelder_mead_multistart<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    seeds: &[Vec<f64>],
    opts: &NelderMeadOpts,
) -> NelderMeadResult {
    assert!(!seeds.is_empty());
    let mut best: Option<NelderMeadResult> = None;
    for s in seeds {
        let r = nelder_mead(&mut f, s, opts);
        let better = match &best {
            None => true,
            Some(b) => r.value < b.value,
        };
        if better {
            best = Some(r);
        }
    }
    best.unwrap()
}

/// Find the root of a *strictly decreasing* `g` on the bracket `[lo, hi]`
/// (so `g(lo) > 0 > g(hi)`), combining Newton steps (via the supplied
/// derivative) with bisection safeguarding. Converges quadratically once
/// near the root; always stays inside the bracket.
///
/// `g` and `dg` are evaluated at the same points; `dg` may be inaccurate
/// (the bracket keeps iteration safe), it only affects speed.
pub fn newton_bisect_decreasing<G, DG>(
    mut g: G,
    mut dg: DG,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> f64
where
    G: FnMut(f64) -> f64,
    DG: FnMut(f64) -> f64,
{
    debug_assert!(lo < hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= x_tol * (1.0 + x.abs()) {
            break;
        }
        let d = dg(x);
        let mut next = if d.is_finite() && d != 0.0 {
            x - gx / d
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        x = next;
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parabola_vertex_recovers_quadratic_minimum() {
        let f = |x: f64| 3.0 * (x - 1.7) * (x - 1.7) + 0.2;
        let v = parabola_vertex_min(0.0, f(0.0), 1.0, f(1.0), 3.0, f(3.0)).unwrap();
        assert_relative_eq!(v, 1.7, epsilon = 1e-12);
        // Concave data has no interior minimum.
        assert!(parabola_vertex_min(0.0, 0.0, 1.0, 1.0, 2.0, 0.0).is_none());
        // Collinear data has zero curvature.
        assert!(parabola_vertex_min(0.0, 0.0, 1.0, 1.0, 2.0, 2.0).is_none());
        // Points must be ordered.
        assert!(parabola_vertex_min(1.0, 0.0, 0.0, 1.0, 2.0, 0.5).is_none());
    }

    #[test]
    fn golden_finds_parabola_min() {
        let r = golden_section_min(|x| (x - 1.3) * (x - 1.3) + 0.25, -4.0, 9.0, 1e-10, 200);
        assert_relative_eq!(r.x, 1.3, epsilon = 1e-8);
        assert_relative_eq!(r.value, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn parabolic_refine_tightens_flat_valley() {
        // Quartic-flavoured valley: flat near the bottom, where a single
        // parabola step stalls. Twelve follow-up evaluations from a badly
        // lopsided bracket must cut the error from 0.8 by well over an
        // order of magnitude and never regress the incumbent value.
        let f = |x: f64| (x - 2.0).powi(4) + 0.5 * (x - 2.0).powi(2) - 1.0;
        let (a, b, c) = (0.3, 1.2, 4.0);
        let r = parabolic_refine(f, (a, b, c), (f(a), f(b), f(c)), 12, 1e-6);
        assert!((r.x - 2.0).abs() < 0.05, "got {}", r.x);
        assert!(r.value <= f(1.2));
        // A generous budget reaches the endgame.
        let r2 = parabolic_refine(f, (a, b, c), (f(a), f(b), f(c)), 40, 1e-9);
        assert_relative_eq!(r2.x, 2.0, epsilon = 1e-4);
        // Respects the iteration budget: zero iterations returns the input.
        let r0 = parabolic_refine(f, (a, b, c), (f(a), f(b), f(c)), 0, 1e-6);
        assert_relative_eq!(r0.x, b);
    }

    #[test]
    fn parabolic_refine_accelerates_on_smooth_valley() {
        // Near-quadratic valley: successive parabolic steps home in almost
        // immediately, which is the production regime (a handful of
        // evaluations refining a scan-located window).
        let f = |x: f64| (x - 1.3).powi(2) + 0.05 * (x - 1.3).powi(4);
        let (a, b, c) = (0.2, 0.9, 2.8);
        let r = parabolic_refine(f, (a, b, c), (f(a), f(b), f(c)), 5, 1e-10);
        assert!((r.x - 1.3).abs() < 2e-3, "got {}", r.x);
        assert!(r.value <= f(0.9));
    }

    #[test]
    fn scan_then_golden_handles_multimodal() {
        // Two wells; the deeper one is near x = 3.
        let f = |x: f64| (x - 3.0).powi(2).min((x + 2.0).powi(2) + 0.5);
        let xs: Vec<f64> = (0..41).map(|i| -5.0 + 0.25 * f64::from(i)).collect();
        let r = scan_then_golden(f, &xs, 1e-10, 200);
        assert_relative_eq!(r.x, 3.0, epsilon = 1e-7);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen =
            |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2);
        let opts = NelderMeadOpts {
            max_iter: 2000,
            ..Default::default()
        };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!(r.value < 1e-9, "value = {}", r.value);
        assert_relative_eq!(r.x[0], 1.0, epsilon = 1e-4);
        assert_relative_eq!(r.x[1], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn nelder_mead_respects_infeasible_regions() {
        // Minimum of (x-2)^2 subject to x <= 1 encoded by +inf penalty:
        // the solver must settle near the boundary x = 1.
        let f = |v: &[f64]| {
            if v[0] > 1.0 {
                f64::INFINITY
            } else {
                (v[0] - 2.0) * (v[0] - 2.0)
            }
        };
        let r = nelder_mead(f, &[0.0], &NelderMeadOpts::default());
        assert!(r.x[0] <= 1.0);
        assert!(r.value < 1.01 + 1e-6);
    }

    #[test]
    fn newton_bisect_root() {
        // g(x) = 1 - x^3, strictly decreasing, root at 1.
        let root = newton_bisect_decreasing(
            |x| 1.0 - x * x * x,
            |x| -3.0 * x * x,
            0.0,
            10.0,
            1e-14,
            100,
        );
        assert_relative_eq!(root, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn newton_bisect_survives_bad_derivative() {
        let root = newton_bisect_decreasing(|x| 2.0 - x, |_| 0.0, 0.0, 10.0, 1e-13, 200);
        assert_relative_eq!(root, 2.0, epsilon = 1e-9);
    }
}
