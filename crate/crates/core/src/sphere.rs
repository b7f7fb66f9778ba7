//! Spherical exponent: the lifted contribution of the measurement side.
//!
//! For measurement ratio `alpha` and lifting parameter `c3 > 0`, the
//! negative square-root term `-sqrt(alpha)` of the plain bound upgrades to
//!
//! ```text
//!   I_sph(c3, alpha) = ghat - (alpha / (2 c3)) * ln(1 - c3 / (2 ghat)),
//!   ghat = (2 c3 - sqrt(4 c3^2 + 16 alpha)) / 8,
//! ```
//!
//! where `ghat < 0` is the closed-form optimizer of the underlying
//! variational problem. As `c3 -> 0+` the expression tends to
//! `-sqrt(alpha)` from above (at rate `+c3/4`), and for large `c3` it
//! behaves like `-(alpha / (2 c3)) (1 + ln(1 + c3^2/alpha))`.

/// Lifted spherical exponent. Requires `c3 > 0`, `alpha > 0`.
pub fn i_sph(c3: f64, alpha: f64) -> f64 {
    debug_assert!(c3 > 0.0 && alpha > 0.0);
    let ghat = (2.0 * c3 - (4.0 * c3 * c3 + 16.0 * alpha).sqrt()) / 8.0;
    // ghat < 0, so -c3/(2 ghat) > 0 and ln_1p keeps small-c3 precision.
    ghat - alpha / (2.0 * c3) * (-c3 / (2.0 * ghat)).ln_1p()
}

/// `c3 -> 0` limit of [`i_sph`]: the plain (non-lifted) spherical term.
pub fn i_sph_limit(alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0);
    -alpha.sqrt()
}
