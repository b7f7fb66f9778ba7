//! Finite-size recovery experiments against the asymptotic predictions.
//!
//! Each trial draws an i.i.d. Gaussian measurement matrix, plants a
//! nonnegative unit-magnitude vector on the last `k` coordinates (the
//! fixed-support, fixed-sign setting that the weak model describes),
//! reconstructs from the `m` measurements, and scores exact recovery.
//! Success counts come with Wilson confidence intervals.
//!
//! Reconstruction is exact for `q = 1` (verified linear programming) and
//! heuristic for `q < 1` (IRLS). For heuristic failures, a nullspace
//! descent can upgrade "the solver disagreed" to "the planted vector is
//! certifiably not minimal"; the two counts are reported separately.
//!
//! Determinism: every trial derives its own stream from `(seed, grid
//! point, trial index)` by a splitmix chain, so results are independent
//! of trial scheduling and worker count.

pub mod irls;
pub mod lp;
pub mod mat;
pub mod nullspace;

use crate::{Error, Result};
use mat::RowMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// 97.5% normal quantile for the 95% Wilson interval.
const WILSON_Z: f64 = 1.959963984540054;
/// Relative `l2` tolerance for declaring exact recovery.
pub const RECOVERY_TOL: f64 = 1e-6;

/// One experiment cell: fixed dimensions and `q`, many trials.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub trials: u32,
    pub seed: u64,
    /// Random restarts for the nullspace certificate search on heuristic
    /// failures (`q < 1` only); 0 disables it.
    pub probe_tries: usize,
}

/// Aggregated outcome of one cell.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TrialStats {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trials: u32,
    pub successes: u32,
    /// Failures where the planted vector was proved non-minimal (all
    /// failures for `q = 1`, probe-confirmed ones for `q < 1`).
    pub certified_failures: u32,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-trial stream: mixes the user seed, a tag identifying the grid
/// point, and the trial index.
fn trial_rng(seed: u64, tag: u64, trial: u64) -> ChaCha8Rng {
    let s = splitmix64(seed ^ splitmix64(tag ^ splitmix64(trial)));
    ChaCha8Rng::seed_from_u64(s)
}

fn grid_tag(cfg: &TrialConfig) -> u64 {
    let mut t = cfg.n as u64;
    for bits in [cfg.alpha.to_bits(), cfg.beta.to_bits(), cfg.q.to_bits()] {
        t = splitmix64(t ^ bits);
    }
    t
}

/// Standard normal by the polar (Marsaglia) method. The spare deviate is
/// discarded so successive draws depend only on the stream position.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = rng.gen::<f64>() * 2.0 - 1.0;
        let v = rng.gen::<f64>() * 2.0 - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// One planted problem instance.
pub struct Instance {
    pub a: RowMat,
    pub x_true: Vec<f64>,
    pub y: Vec<f64>,
}

/// Draw an i.i.d. N(0,1) `m x n` matrix and plant ones on the last `k`
/// coordinates.
pub fn gen_instance<R: Rng>(n: usize, m: usize, k: usize, rng: &mut R) -> Instance {
    let a = RowMat::from_fn(m, n, |_, _| standard_normal(rng));
    let mut x_true = vec![0.0; n];
    for xi in x_true.iter_mut().skip(n - k) {
        *xi = 1.0;
    }
    let y = a.matvec(&x_true);
    Instance { a, x_true, y }
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u32, trials: u32) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Round the asymptotic ratios to integer dimensions, enforcing
/// `1 <= k < m < n`.
pub fn dims_for(n: usize, alpha: f64, beta: f64) -> Result<(usize, usize)> {
    let m = ((alpha * n as f64).round() as usize).max(1);
    let k = ((beta * n as f64).round() as usize).max(1);
    if !(k < m && m < n) {
        return Err(Error::InvalidInput(format!(
            "dimensions must satisfy 1 <= k < m < n, got k = {k}, m = {m}, n = {n}"
        )));
    }
    Ok((m, k))
}

fn run_one(cfg: &TrialConfig, m: usize, k: usize, trial: u64) -> Result<(bool, bool)> {
    let mut rng = trial_rng(cfg.seed, grid_tag(cfg), trial);
    let inst = gen_instance(cfg.n, m, k, &mut rng);
    let x_hat = if cfg.q == 1.0 {
        lp::solve_l1(&inst.a, &inst.y)?
    } else {
        irls::solve_irls_lq(&inst.a, &inst.y, cfg.q)?
    };
    let err: f64 = x_hat
        .iter()
        .zip(&inst.x_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = inst.x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    let recovered = err <= RECOVERY_TOL * norm.max(1.0);
    if recovered {
        return Ok((true, false));
    }
    let certified = if cfg.q == 1.0 {
        // The LP optimum is verified; any disagreement means the planted
        // vector is not the unique minimizer.
        true
    } else if cfg.probe_tries > 0 {
        nullspace::nullspace_probe(&inst.a, &inst.x_true, cfg.q, &mut rng, cfg.probe_tries)?
    } else {
        false
    };
    Ok((false, certified))
}

/// Run all trials of a cell (in parallel; the counts are order-free and
/// each trial owns its seed, so results do not depend on the worker
/// count).
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialStats> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) || !(cfg.beta > 0.0 && cfg.beta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha and beta must be in (0,1), got ({}, {})",
            cfg.alpha, cfg.beta
        )));
    }
    if !(0.0..=1.0).contains(&cfg.q) {
        return Err(Error::InvalidInput(format!("q must be in [0,1], got {}", cfg.q)));
    }
    if cfg.trials == 0 || cfg.n < 4 {
        return Err(Error::InvalidInput(
            "need at least one trial and n >= 4".into(),
        ));
    }
    let (m, k) = dims_for(cfg.n, cfg.alpha, cfg.beta)?;
    let outcomes: Vec<(bool, bool)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_one(cfg, m, k, t))
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|o| o.0).count() as u32;
    let certified_failures = outcomes.iter().filter(|o| o.1).count() as u32;
    let (ci_lo, ci_hi) = wilson_ci(successes, cfg.trials);
    Ok(TrialStats {
        n: cfg.n,
        m,
        k,
        trials: cfg.trials,
        successes,
        certified_failures,
        rate: successes as f64 / cfg.trials as f64,
        ci_lo,
        ci_hi,
    })
}

/// Symmetric grid of `count` beta values around a predicted threshold,
/// spanning `[0.5, 1.5] * beta_star` (clipped to a valid range).
pub fn beta_grid_around(beta_star: f64, count: usize) -> Vec<f64> {
    let lo = (0.5 * beta_star).max(1e-3);
    let hi = (1.5 * beta_star).min(0.999);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64)
        .collect()
}
