//! Lower bounds on the recovery thresholds of `lq`-minimization
//! (`0 <= q <= 1`) for under-determined Gaussian linear systems.
//!
//! For a measurement ratio `alpha = m/n` and sparsity ratio `beta = k/n`,
//! the crate certifies pairs `(alpha, beta)` at which `lq`-minimization
//! recovers sparse solutions with overwhelming probability, in three
//! failure models of increasing strictness:
//!
//! * **weak** — a fixed support and fixed sign pattern,
//! * **sectional** — a fixed support, all sign patterns,
//! * **strong** — all supports simultaneously.
//!
//! Certification reduces to the sign of a variational expression built
//! from Gaussian expectations of per-coordinate maximizations, minimized
//! over a handful of multipliers, and finally minimized over a lifting
//! parameter `c3 > 0`. The `c3 -> 0` limit recovers the plain
//! (non-lifted) bound; positive `c3` can only improve it. The largest
//! certified `beta` for each `alpha` is located by bisection.
//!
//! Module map, bottom-up:
//!
//! * [`specfun`] — in-repo `erf`/`erfc`/`ln_erfc` and normal helpers.
//! * [`optim`] — golden section, Nelder–Mead, guarded root finding.
//! * [`inner_max`] — exact per-coordinate maximizers (closed forms for
//!   `q` in `{0, 1/2, 1}`, guarded Newton for generic `q`).
//! * [`gauss_expect`] — `log E exp(c3 * M(h))` for piecewise-smooth `M`
//!   of quadratic growth, with panel quadrature and kink isolation.
//! * [`sphere`] — the spherical (Gaussian-width) exponent and its limit.
//! * [`exponents`] — the three per-model exponents and the certification
//!   condition, including the minimization over multipliers and `c3`.
//! * [`q0_closed`] — closed-form `q -> 0` certification conditions.
//! * [`threshold`] — bisection for the largest certified `beta` and curve
//!   sweeps over `(q, alpha)` grids.
//! * [`empirical`] — finite-`n` Monte Carlo: problem generation, an exact
//!   `l1` linear-programming solver, an IRLS heuristic for `q < 1`, and a
//!   null-space certificate probe.

pub mod empirical;
pub mod exponents;
pub mod gauss_expect;
pub mod inner_max;
pub mod optim;
pub mod q0_closed;
pub mod specfun;
pub mod sphere;
pub mod threshold;

pub use exponents::{ConditionEval, ExponentValue, LiftMode, LiftParams, ProblemKind};
pub use gauss_expect::{LogExpectation, QuadratureSpec, Scheme};
pub use inner_max::{Branch, InnerMaxResult, ScalarProblem, SignMode};
pub use threshold::{CurvePoint, CurveRequest, ThresholdResult};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter was outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The two independent quadrature passes failed to agree to the
    /// requested tolerance, so the expectation value cannot be trusted.
    #[error(
        "quadrature disagreement: panel estimate {panel:e} vs refined {refined:e} \
         (tolerance {tol:e})"
    )]
    QuadratureDisagreement { panel: f64, refined: f64, tol: f64 },

    /// A bisection bracket did not straddle a sign change: the condition
    /// has the same sign at both endpoints.
    #[error(
        "bracket failure on [{lo}, {hi}]: condition values {f_lo:e} and {f_hi:e} \
         do not straddle zero"
    )]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A dense linear solve (Cholesky/LU) met a non-positive pivot.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// The linear-programming solver hit its iteration cap or failed its
    /// optimality verification.
    #[error("linear program failed: {0}")]
    LinearProgram(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
