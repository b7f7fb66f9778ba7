//! Gaussian expectations of exponentiated value functions,
//! `log E[exp(c3 * M(h))]` and plain `E[M(h)]`, for `h ~ N(0, 1)`.
//!
//! The value functions `M` produced by the per-coordinate maximizers are
//! piecewise smooth with isolated `C^0`/`C^1` kinks (where the maximizer
//! jumps between analytic branches) and at most quadratic growth
//! `M(h) ~ b h^2`. Naive global quadrature loses its spectral accuracy at
//! the kinks, and the integrand `exp(c3 M(h) - h^2/2)` becomes heavy-tailed
//! as `c3 b` approaches `1/2`. Both issues are handled explicitly:
//!
//! * **Growth control.** The variance-inflating change of variables
//!   `h = s t`, `s = 1/sqrt(1 - 2 lambda)`, re-expresses the integral as
//!   `log E = log s + log \int exp(c3 M(s t) - lambda (s t)^2) phi(t) dt`
//!   exactly, for *any* `lambda` in `[0, 1/2)`. The inflation is chosen by
//!   a ladder — `1 - 2 lambda` halves per rung — taking the smallest
//!   `lambda` whose substituted log-integrand has verifiably decayed by
//!   `DECAY_NATS` at the edge of the integration window, checked by direct
//!   sampling. Truncation can only lose nonnegative mass, so the sampled
//!   decay certificate bounds the relative truncation error by
//!   `~exp(-DECAY_NATS)`. Growth at or beyond the Gaussian rate `h^2/2`
//!   never decays on any rung and is reported as infinite
//!   (`finite = false`). No curvature fitting is involved: fitted growth
//!   misreads locally linear branches (under-inflating and truncating at
//!   the peak) and branch crossovers (over-inflating into spurious
//!   infeasibility).
//! * **Kink isolation.** Each value function reports a branch marker along
//!   with its value. Marker changes located by a scan-and-bisect pass
//!   become panel boundaries, so every quadrature panel sees an analytic
//!   integrand. On the folded full line the marker also carries a
//!   which-side-dominates bit, so fold crossovers (smooth but sharply
//!   curved) are isolated the same way.
//! * **Narrow-feature resolution.** At large inflation the substituted
//!   variable compresses original-coordinate structure by `s`: kinks
//!   crowd toward `t = 0` and interior integrand peaks (which sit at
//!   `O(1)` width in the original variable) become spikes no sampler can
//!   be trusted to find. Both are resolved analytically: the kink scan is
//!   geometric down to `1e-13` of the window, kinks get relative flank
//!   edges, and interior peaks are located by bisecting the derivative of
//!   the log-integrand — the value functions are suprema of affine
//!   functions of `h`, so within a branch that derivative is strictly
//!   decreasing and the peak is unique — then bracketed by panel edges at
//!   multiples of the local peak width.
//! * **Verification.** The integral is computed twice — composite
//!   Gauss–Legendre panels at the requested node budget and again at twice
//!   the per-panel order. Disagreement beyond `1e-6 * max(1, |log|)`
//!   triggers an adaptive-Simpson arbitration pass; if that also fails to
//!   settle, the call returns [`Error::QuadratureDisagreement`] rather
//!   than an untrusted number.
//!
//! Everything runs in the log domain (log-sum-exp over quadrature nodes),
//! so near-infeasible integrands neither overflow nor lose the leading
//! digits of the result.

use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Quadrature backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    /// Composite Gauss–Legendre panels with order-doubling verification
    /// (default; adaptive Simpson is kept as arbitration).
    PanelGauss,
    /// Adaptive Simpson only (slower; used for cross-checks).
    Adaptive,
}

/// Accuracy/effort knobs for the expectation layer.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    /// Total Gauss–Legendre nodes across the base panels (>= 32).
    pub node_count: usize,
    pub scheme: Scheme,
    /// Integration half-width in standard deviations of the *substituted*
    /// variable (>= 8).
    pub tail_cut: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_count: 256,
            scheme: Scheme::PanelGauss,
            tail_cut: 10.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 32 {
            return Err(Error::InvalidInput(format!(
                "node_count must be >= 32, got {}",
                self.node_count
            )));
        }
        if !(self.tail_cut >= 8.0) {
            return Err(Error::InvalidInput(format!(
                "tail_cut must be >= 8, got {}",
                self.tail_cut
            )));
        }
        Ok(())
    }
}

/// `log E[exp(...)]` together with a finiteness verdict.
#[derive(Debug, Clone, Copy)]
pub struct LogExpectation {
    /// `+inf` when `finite` is false.
    pub log_value: f64,
    pub finite: bool,
}

const BASE_PANELS: usize = 8;
const PROBE_COUNT: usize = 65;
const KINK_SCAN: usize = 129;
const DOUBLING_TOL: f64 = 1e-6;
/// Required sampled decay (in nats) of the substituted log-integrand at the
/// window edge before a rung of the inflation ladder is accepted; bounds
/// the relative truncation error by roughly `exp(-DECAY_NATS)`, far below
/// the quadrature verification tolerance.
const DECAY_NATS: f64 = 42.0;
/// Ladder length: `1 - 2 lambda = 2^-rung`, so the integration window
/// stretches by `sqrt(2)` per rung, up to `2^13 = 8192` times the base
/// width. Growth needing more inflation than that sits within `~1e-8` of
/// the divergence boundary and is treated as infinite.
const LADDER_RUNGS: i32 = 26;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn ln_phi(t: f64) -> f64 {
    -0.5 * t * t - 0.5 * LN_2PI
}

fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Gauss–Legendre nodes/weights on [-1, 1], cached per order.
fn gl_rule(k: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(rule) = guard.get(&k) {
            return Arc::clone(rule);
        }
    }
    let mut rule = Vec::with_capacity(k);
    for i in 1..=k {
        // Tricomi initial guess, then Newton on P_k.
        let mut x =
            (std::f64::consts::PI * (i as f64 - 0.25) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = (k as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let rule = Arc::new(rule);
    cache.lock().unwrap().insert(k, Arc::clone(&rule));
    rule
}

/// Sorted panel edges on `[0, t_max]` plus the list of detected kink
/// locations: uniform base panels and one edge per branch-marker change,
/// located by bisection. The marker scan mixes a uniform grid with
/// geometrically spaced low-`t` points: variance inflation compresses
/// original-coordinate structure toward `t = 0`, where a uniform scan
/// would hop over paired branch changes. With `deep` set (large inflation
/// scale) every kink additionally receives relative flank edges, so a
/// corner whose curvature is sharpened by the substitution still meets
/// panels matched to its own scale.
fn panel_edges(
    t_max: f64,
    deep: bool,
    marker_at: &dyn Fn(f64) -> u16,
) -> (Vec<f64>, Vec<f64>) {
    let mut scan: Vec<f64> = (0..KINK_SCAN)
        .map(|i| t_max * i as f64 / (KINK_SCAN - 1) as f64)
        .collect();
    let mut g = t_max * 1e-13;
    while g < t_max / 8.0 {
        scan.push(g);
        g *= 1.3;
    }
    scan.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scan.dedup();
    let mut edges: Vec<f64> = (0..=BASE_PANELS)
        .map(|i| t_max * i as f64 / BASE_PANELS as f64)
        .collect();
    let mut kinks: Vec<f64> = Vec::new();
    let mut prev_t = scan[0];
    let mut prev_m = marker_at(prev_t);
    for &t in &scan[1..] {
        let m = marker_at(t);
        if m != prev_m {
            let (mut a, mut b) = (prev_t, t);
            let ma = prev_m;
            while b - a > 1e-13 * t_max.max(1.0) {
                let mid = 0.5 * (a + b);
                if marker_at(mid) == ma {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            kinks.push(0.5 * (a + b));
        }
        prev_t = t;
        prev_m = m;
    }
    edges.extend_from_slice(&kinks);
    if deep {
        for &k in &kinks {
            for j in [2, 6, 10, 14, 18] {
                let w = k * (2.0f64).powi(-j);
                for e in [k - w, k + w] {
                    if e > 0.0 && e < t_max {
                        edges.push(e);
                    }
                }
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Drop near-duplicate edges (kink on top of a base edge).
    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        if out
            .last()
            .map_or(true, |&last: &f64| e - last > 1e-11 * t_max.max(1.0))
        {
            out.push(e);
        }
    }
    (out, kinks)
}

/// `log \int_0^T exp(exponent(t)) dt` over the paneling, `k` GL nodes per
/// panel, evaluated by log-sum-exp.
fn log_panel_integral(edges: &[f64], k: usize, exponent: &dyn Fn(f64) -> f64) -> f64 {
    let rule = gl_rule(k);
    let mut terms: Vec<f64> = Vec::with_capacity((edges.len() - 1) * k);
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for &(x, w) in rule.iter() {
            let t = mid + half * x;
            terms.push(exponent(t) + (w * half).ln());
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.iter().map(|&e| (e - m).exp()).sum();
    m + sum.ln()
}

/// Plain `\int_0^T f(t) dt` over the paneling.
fn panel_integral(edges: &[f64], k: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let rule = gl_rule(k);
    let mut total = 0.0;
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for &(x, w) in rule.iter() {
            total += w * half * f(mid + half * x);
        }
    }
    total
}

/// Recursive adaptive Simpson with a global subdivision budget. When the
/// budget is exhausted the current estimate is accepted (the arbitration
/// caller compares two budgets, so silent acceptance is still checked).
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    budget: &mut i64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || *budget <= 0 {
        return left + right + delta / 15.0;
    }
    *budget -= 1;
    adaptive_simpson(f, a, m, fa, flm, fm, tol * 0.5, budget)
        + adaptive_simpson(f, m, b, fm, frm, fb, tol * 0.5, budget)
}

fn simpson_over_edges(edges: &[f64], f: &dyn Fn(f64) -> f64, tol: f64, budget: i64) -> f64 {
    let mut budget = budget;
    let mut total = 0.0;
    for win in edges.windows(2) {
        let (a, b) = (win[0], win[1]);
        let m = 0.5 * (a + b);
        total += adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, &mut budget);
    }
    total
}

fn agree(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * f64::max(1.0, b.abs())
}

/// Simpson arbitration for the log-domain integrand: two runs at different
/// budgets/tolerances must agree, otherwise the expectation is rejected.
fn simpson_log_arbitration(
    edges: &[f64],
    exponent: &dyn Fn(f64) -> f64,
    shift: f64,
) -> Result<f64> {
    let f = |t: f64| (exponent(t) - shift).exp();
    let i1 = simpson_over_edges(edges, &f, 1e-11, 2047);
    let i2 = simpson_over_edges(edges, &f, 1e-12, 4094);
    if i1 <= 0.0 || i2 <= 0.0 {
        return Err(Error::QuadratureDisagreement {
            panel: i1,
            refined: i2,
            tol: DOUBLING_TOL,
        });
    }
    let (l1, l2) = (i1.ln() + shift, i2.ln() + shift);
    if agree(l1, l2, DOUBLING_TOL) {
        Ok(l2)
    } else {
        Err(Error::QuadratureDisagreement {
            panel: l1,
            refined: l2,
            tol: DOUBLING_TOL,
        })
    }
}

/// `log E[exp(c3 * M(h))]` for standard normal `h`.
///
/// `m` maps a point to `(value, branch_marker)`; marker changes are treated
/// as potential kinks. With `half_line = true` the value function is taken
/// to depend on `|h|` only and is evaluated on `h >= 0`; otherwise both
/// signs are evaluated and folded onto the half-line.
///
/// Returns `finite = false` (with `log_value = +inf`) when no admissible
/// variance inflation level yields the required edge decay, i.e. the
/// integrand grows at least as fast as the Gaussian density decays.
pub fn log_e_exp<F>(c3: f64, m: F, half_line: bool, spec: &QuadratureSpec) -> Result<LogExpectation>
where
    F: Fn(f64) -> (f64, u8),
{
    log_e_exp_impl(c3, m, half_line, spec, true)
}

/// Search-grade variant of [`log_e_exp`]: identical feasibility detection,
/// substitution, and kink isolation, but a single panel pass at the base
/// order — no doubling verification. Optimizer inner loops may use it
/// because every *reported* value is re-evaluated through the verified
/// path at the final arg-min; it must never feed a reported quantity
/// directly.
pub(crate) fn log_e_exp_search<F>(
    c3: f64,
    m: F,
    half_line: bool,
    spec: &QuadratureSpec,
) -> Result<LogExpectation>
where
    F: Fn(f64) -> (f64, u8),
{
    log_e_exp_impl(c3, m, half_line, spec, false)
}

fn log_e_exp_impl<F>(
    c3: f64,
    m: F,
    half_line: bool,
    spec: &QuadratureSpec,
    verify: bool,
) -> Result<LogExpectation>
where
    F: Fn(f64) -> (f64, u8),
{
    spec.validate()?;
    if !(c3 > 0.0) || !c3.is_finite() {
        return Err(Error::InvalidInput(format!("c3 must be positive, got {c3}")));
    }
    let t_max = spec.tail_cut;

    // Exponent of the folded, substituted integrand (Gaussian density
    // included) at inflation `lambda`, window scale `s = 1/sqrt(1-2 lambda)`.
    // The substitution h = s t is an exact identity for any lambda < 1/2:
    // phi(s t) = exp(-lambda (s t)^2) phi(t) / <unit Jacobian in log s>.
    let exponent_at = |lambda: f64, s: f64, t: f64| -> f64 {
        let h = s * t;
        let g = if half_line {
            c3 * m(h).0 - lambda * h * h + std::f64::consts::LN_2
        } else {
            let gp = c3 * m(h).0 - lambda * h * h;
            let gn = c3 * m(-h).0 - lambda * h * h;
            logaddexp(gp, gn)
        };
        g + ln_phi(t)
    };

    // Decay certificate for one inflation level: sample the substituted
    // log-integrand and require DECAY_NATS of decay at the window edge.
    // Returns the sampled peak location when the level passes.
    let eval_rung = |one_minus: f64| -> Result<Option<f64>> {
        let lambda = 0.5 * (1.0 - one_minus);
        let s = 1.0 / one_minus.sqrt();
        let mut peak = f64::NEG_INFINITY;
        let mut edge = f64::NEG_INFINITY;
        let mut tp = 0.0;
        for i in 0..PROBE_COUNT {
            let t = t_max * i as f64 / (PROBE_COUNT - 1) as f64;
            let e = exponent_at(lambda, s, t);
            if e.is_nan() {
                return Err(Error::InvalidInput(format!(
                    "value function returned a non-finite value at h = {}",
                    s * t
                )));
            }
            if e > peak {
                peak = e;
                tp = t;
            }
            if i + 3 >= PROBE_COUNT {
                edge = edge.max(e);
            }
        }
        if peak.is_finite() && edge <= peak - DECAY_NATS {
            // The integrand must also be falling at the window edge: a
            // decayed edge value alone could mask growth that re-rises
            // just beyond the window (the window in original coordinates
            // is `[0, s * t_max]`, and what lies beyond it is truncated).
            let ge = exponent_at(lambda, s, t_max);
            let gi = exponent_at(lambda, s, t_max * (1.0 - 1e-6));
            if ge <= gi {
                Ok(Some(tp))
            } else {
                Ok(None)
            }
        } else {
            Ok(None)
        }
    };

    // Inflation ladder: walk rungs (halving 1 - 2 lambda) until the decay
    // certificate passes, then bisect geometrically between the last
    // failing and first passing level. Near-minimal inflation keeps the
    // substituted peak wide, so the fixed node budget resolves it.
    let mut one_minus = 1.0;
    let mut rung = 0;
    let mut t_peak = None;
    while rung <= LADDER_RUNGS {
        match eval_rung(one_minus)? {
            Some(tp) => {
                t_peak = Some(tp);
                break;
            }
            None => {
                one_minus *= 0.5;
                rung += 1;
            }
        }
    }
    let Some(mut t_peak) = t_peak else {
        return Ok(LogExpectation {
            log_value: f64::INFINITY,
            finite: false,
        });
    };
    if rung > 0 {
        let mut lo = one_minus * 2.0; // last failing level
        let mut hi = one_minus; // first passing level
        for _ in 0..4 {
            let mid = (lo * hi).sqrt();
            match eval_rung(mid)? {
                Some(tp) => {
                    hi = mid;
                    t_peak = tp;
                }
                None => lo = mid,
            }
        }
        one_minus = hi;
    }
    let lambda = 0.5 * (1.0 - one_minus);
    let s = 1.0 / one_minus.sqrt();

    let exponent = |t: f64| -> f64 { exponent_at(lambda, s, t) };
    // Branch markers of both fold sides, plus a which-side-dominates bit:
    // a fold crossover is smooth but its curvature scales with `s^2`, so
    // it needs a panel edge exactly like a branch kink does.
    let marker_at = |t: f64| -> u16 {
        let h = s * t;
        if half_line {
            u16::from(m(h).1)
        } else {
            let (vp, mp) = m(h);
            let (vn, mn) = m(-h);
            u16::from(mp) | (u16::from(mn) << 7) | (u16::from(vp >= vn) << 15)
        }
    };

    let deep = s >= 8.0;
    let (mut edges, kinks) = panel_edges(t_max, deep, &marker_at);
    // When the ladder overshoots, the mass is squeezed into a narrow band
    // near the left edge; concentrate panels around the sampled peak so the
    // base node budget still resolves it.
    if t_peak > 0.0 && t_peak < t_max / 8.0 {
        for f in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let e = (t_peak * f).min(t_max);
            edges.push(e);
        }
    }
    // Interior peaks of the original-coordinate log-integrand
    // `c3 M(h) - h^2/2`. At large inflation such a peak — `O(1)` wide in
    // `h`, hence `O(1/s)` wide in `t` — can fall between quadrature nodes
    // and between the probes of every sampling pass, so it must be located
    // structurally. `M` is a supremum of functions affine in `h`, so it is
    // convex, and whenever the expectation is finite its branch curvature
    // stays below `1/c3`; the derivative `psi(h) = c3 M'(h) - h` is then
    // strictly decreasing within a branch and each inter-kink segment
    // holds at most one peak, found by bisection on a central-difference
    // `psi`. Edges at multiples of the local peak width make the spike
    // visible to the panel rules at any scale.
    if deep {
        let h_end = s * t_max;
        let mut bounds: Vec<f64> = kinks.iter().map(|&t| s * t).collect();
        bounds.push(0.0);
        bounds.push(h_end);
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sides: &[f64] = if half_line { &[1.0] } else { &[1.0, -1.0] };
        for &side in sides {
            let val = |h: f64| m(side * h).0;
            let psi = |h: f64| {
                let e = 1e-7 * (1.0 + h);
                c3 * (val(h + e) - val(h - e)) / (2.0 * e) - h
            };
            for win in bounds.windows(2) {
                let pad = 1e-6 * (1.0 + win[1]);
                let (a0, b0) = (win[0] + pad, win[1] - pad);
                if b0 <= a0 {
                    continue;
                }
                if !(psi(a0) > 0.0 && psi(b0) < 0.0) {
                    continue;
                }
                let (mut a, mut b) = (a0, b0);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    if psi(mid) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let h_star = 0.5 * (a + b);
                let e2 = 1e-3 * (1.0 + h_star);
                let mpp =
                    (val(h_star + e2) - 2.0 * val(h_star) + val(h_star - e2)) / (e2 * e2);
                let sigma_h = 1.0 / (1.0 - c3 * mpp).max(1e-12).sqrt();
                if sigma_h / s >= t_max / 64.0 {
                    continue; // wide peak: the base panels resolve it
                }
                for d in [-9.5, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 9.5] {
                    let t = (h_star + d * sigma_h) / s;
                    if t > 0.0 && t < t_max {
                        edges.push(t);
                    }
                }
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-11 * t_max.max(1.0));
    let k = (spec.node_count / BASE_PANELS).max(4);

    match spec.scheme {
        Scheme::PanelGauss => {
            let l1 = log_panel_integral(&edges, k, &exponent);
            if !verify {
                return Ok(LogExpectation {
                    log_value: s.ln() + l1,
                    finite: true,
                });
            }
            let l2 = log_panel_integral(&edges, 2 * k, &exponent);
            if agree(l1, l2, DOUBLING_TOL) {
                Ok(LogExpectation {
                    log_value: s.ln() + l2,
                    finite: true,
                })
            } else {
                // Arbitration: adaptive Simpson must agree with itself.
                let ls = simpson_log_arbitration(&edges, &exponent, l2.max(l1))?;
                Ok(LogExpectation {
                    log_value: s.ln() + ls,
                    finite: true,
                })
            }
        }
        Scheme::Adaptive => {
            let coarse = log_panel_integral(&edges, k, &exponent);
            let ls = simpson_log_arbitration(&edges, &exponent, coarse)?;
            Ok(LogExpectation {
                log_value: s.ln() + ls,
                finite: true,
            })
        }
    }
}

/// Plain expectation `E[M(h)]` for standard normal `h`, with the same kink
/// isolation and two-pass verification as [`log_e_exp`] (no inflation
/// ladder: sub-exponential integrands need no substitution).
pub fn e_plain<F>(m: F, half_line: bool, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> (f64, u8),
{
    e_plain_impl(m, half_line, spec, true)
}

/// Search-grade variant of [`e_plain`]; see [`log_e_exp_search`] for the
/// usage contract.
pub(crate) fn e_plain_search<F>(m: F, half_line: bool, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> (f64, u8),
{
    e_plain_impl(m, half_line, spec, false)
}

fn e_plain_impl<F>(m: F, half_line: bool, spec: &QuadratureSpec, verify: bool) -> Result<f64>
where
    F: Fn(f64) -> (f64, u8),
{
    spec.validate()?;
    let t_max = spec.tail_cut;
    let f = |t: f64| -> f64 {
        let v = if half_line {
            2.0 * m(t).0
        } else {
            m(t).0 + m(-t).0
        };
        v * (ln_phi(t)).exp()
    };
    let marker_at = |t: f64| -> u16 {
        if half_line {
            u16::from(m(t).1)
        } else {
            u16::from(m(t).1) | (u16::from(m(-t).1) << 8)
        }
    };
    let (edges, _) = panel_edges(t_max, false, &marker_at);
    let k = (spec.node_count / BASE_PANELS).max(4);
    let i1 = panel_integral(&edges, k, &f);
    if !verify {
        return Ok(i1);
    }
    let i2 = panel_integral(&edges, 2 * k, &f);
    if agree(i1, i2, 1e-8) {
        return Ok(i2);
    }
    let s1 = simpson_over_edges(&edges, &f, 1e-11, 511);
    let s2 = simpson_over_edges(&edges, &f, 1e-12, 1022);
    if agree(s1, s2, 1e-8) {
        Ok(s2)
    } else {
        Err(Error::QuadratureDisagreement {
            panel: s1,
            refined: s2,
            tol: 1e-8,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{erf, normal_cdf};
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        // GL with k nodes is exact through degree 2k-1.
        let rule = gl_rule(8);
        let mut s = 0.0;
        for &(x, w) in rule.iter() {
            s += w * x.powi(14);
        }
        assert_relative_eq!(s, 2.0 / 15.0, epsilon = 1e-14);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn mgf_of_abs_h_matches_closed_form() {
        // E exp(t|h|) = 2 exp(t^2/2) Phi(t).
        for &t in &[0.1, 0.5, 1.0, 2.0] {
            let r = log_e_exp(t, |h| (h.abs(), 0), true, &spec()).unwrap();
            let exact = std::f64::consts::LN_2 + 0.5 * t * t + normal_cdf(t).ln();
            assert!(r.finite);
            assert_relative_eq!(r.log_value, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn gaussian_quadratic_mgf_with_inflation() {
        // E exp(t h^2) = 1/sqrt(1 - 2t); t = 0.3 forces the substitution.
        let r = log_e_exp(1.0, |h| (0.3 * h * h, 0), false, &spec()).unwrap();
        assert!(r.finite);
        assert_relative_eq!(r.log_value, -0.5 * (0.4f64).ln(), epsilon = 1e-9);
        // t = 0.45: even closer to the boundary.
        let r2 = log_e_exp(1.0, |h| (0.45 * h * h, 0), false, &spec()).unwrap();
        assert!(r2.finite);
        assert_relative_eq!(r2.log_value, -0.5 * (0.1f64).ln(), epsilon = 1e-8);
    }

    #[test]
    fn infeasible_growth_detected() {
        let r = log_e_exp(1.0, |h| (0.6 * h * h, 0), false, &spec()).unwrap();
        assert!(!r.finite);
        assert!(r.log_value.is_infinite());
        // Exactly at the boundary counts as infeasible too.
        let r2 = log_e_exp(2.0, |h| (0.25 * h * h, 0), true, &spec()).unwrap();
        assert!(!r2.finite);
    }

    #[test]
    fn shifted_square_matches_erf_closed_form() {
        // E exp((|h| + c)^2 / 4) = sqrt(2) e^{c^2/2} (1 + erf(c/2)),
        // derived by completing the square.
        let c = 0.5;
        let r = log_e_exp(1.0, |h| ((h.abs() + c).powi(2) / 4.0, 0), true, &spec()).unwrap();
        let exact = (2.0f64).sqrt().ln() + c * c / 2.0 + (1.0 + erf(c / 2.0)).ln();
        assert!(r.finite);
        assert_relative_eq!(r.log_value, exact, epsilon = 1e-9);
    }

    #[test]
    fn kink_isolation_keeps_full_accuracy() {
        // M(h) = max(0, |h| - 1) has a C^0 kink at |h| = 1.
        // E exp(c3 M) = erf(1/sqrt(2)) + 2 exp(c3^2/2 - c3) Phi(c3 - 1).
        for &c3 in &[0.5, 1.0, 2.0] {
            let m = |h: f64| {
                let v = (h.abs() - 1.0).max(0.0);
                (v, u8::from(h.abs() > 1.0))
            };
            let r = log_e_exp(c3, m, true, &spec()).unwrap();
            let exact = (erf(1.0 / std::f64::consts::SQRT_2)
                + 2.0 * (c3 * c3 / 2.0 - c3).exp() * normal_cdf(c3 - 1.0))
            .ln();
            assert_relative_eq!(r.log_value, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn signed_integrand_with_linear_tilt() {
        // E exp(t h) = exp(t^2/2) — genuinely signed integrand.
        let r = log_e_exp(1.0, |h| (1.3 * h, 0), false, &spec()).unwrap();
        assert_relative_eq!(r.log_value, 1.3f64 * 1.3 / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn plain_moments() {
        let e_abs = e_plain(|h| (h.abs(), 0), true, &spec()).unwrap();
        assert_relative_eq!(
            e_abs,
            (2.0 / std::f64::consts::PI).sqrt(),
            epsilon = 1e-12
        );
        let e_sq = e_plain(|h| (h * h, 0), false, &spec()).unwrap();
        assert_relative_eq!(e_sq, 1.0, epsilon = 1e-12);
        // Kinked plain integrand: E max(0, |h| - 1)
        //   = 2(phi(1) - 1 * Q(1)) where Q is the upper tail.
        let e_k = e_plain(
            |h| ((h.abs() - 1.0).max(0.0), u8::from(h.abs() > 1.0)),
            true,
            &spec(),
        )
        .unwrap();
        let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let exact = 2.0 * (phi1 - (1.0 - normal_cdf(1.0)));
        assert_relative_eq!(e_k, exact, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_scheme_agrees_with_panels() {
        let s_panel = log_e_exp(1.0, |h| (h.abs(), 0), true, &spec()).unwrap();
        let s_adapt = log_e_exp(
            1.0,
            |h| (h.abs(), 0),
            true,
            &QuadratureSpec {
                scheme: Scheme::Adaptive,
                ..spec()
            },
        )
        .unwrap();
        assert_relative_eq!(s_panel.log_value, s_adapt.log_value, epsilon = 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(log_e_exp(0.0, |h| (h, 0), false, &spec()).is_err());
        let bad = QuadratureSpec {
            node_count: 8,
            ..spec()
        };
        assert!(log_e_exp(1.0, |h| (h, 0), false, &bad).is_err());
    }
}
