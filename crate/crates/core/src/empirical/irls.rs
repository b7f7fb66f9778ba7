//! Iteratively reweighted least squares for `l_q` reconstruction with
//! `q < 1`.
//!
//! This is a *heuristic*: the problem is non-convex and IRLS only promises
//! a stationary point of the smoothed objective
//! `sum_i (x_i^2 + eps^2)^{q/2}` under a decreasing smoothing schedule.
//! It is the standard practical reconstruction in this regime and works
//! well below threshold, but a disagreement with the planted vector is
//! not by itself proof of model failure — see
//! [`super::nullspace::nullspace_probe`] for the certificate search.
//!
//! Each inner step solves the weighted minimum-norm problem exactly:
//! with `D = diag((x_i^2 + eps^2)^{1 - q/2})`, the update is
//! `x <- D A^T (A D A^T)^{-1} y`, so iterates stay feasible throughout.

use super::mat::{cholesky_solve, RowMat};
use crate::Result;

/// Floor of the smoothing schedule; keeps `A D A^T` comfortably
/// invertible in double precision while sitting far below the recovery
/// tolerance.
const EPS_FLOOR: f64 = 3e-8;
const EPS_DECAY: f64 = 0.3;
const INNER_STEPS: usize = 4;

fn weighted_min_norm(a: &RowMat, y: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let mut g = a.gram_weighted(d);
    // Tiny ridge to keep the factorization stable when most weights have
    // collapsed; it perturbs the solution far below the recovery tolerance.
    let m = g.rows();
    let mut tr = 0.0;
    for i in 0..m {
        tr += g.at(i, i);
    }
    let ridge = 1e-14 * (tr / m as f64).max(1.0);
    for i in 0..m {
        *g.at_mut(i, i) += ridge;
    }
    let z = cholesky_solve(&g, y)?;
    let atz = a.t_matvec(&z);
    Ok(atz.iter().zip(d).map(|(v, di)| v * di).collect())
}

/// Smoothed objective used to rank candidate reconstructions.
fn smoothed_lq(x: &[f64], q: f64, eps: f64) -> f64 {
    x.iter().map(|v| (v * v + eps * eps).powf(q / 2.0)).sum()
}

/// Heuristic `min ||x||_q^q  s.t.  A x = y` for `0 <= q < 1`. Runs the
/// smoothing schedule from two deterministic initializations (minimum
/// `l2` norm and matched filter) and returns the candidate with the
/// smaller smoothed objective.
pub fn solve_irls_lq(a: &RowMat, y: &[f64], q: f64) -> Result<Vec<f64>> {
    assert!((0.0..1.0).contains(&q), "q = {q} out of IRLS range");
    let n = a.cols();
    let min_norm = weighted_min_norm(a, y, &vec![1.0; n])?;
    let matched = a.t_matvec(y);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x0 in [min_norm, matched] {
        let mut x = x0;
        let mut eps = 1.0f64;
        while eps >= EPS_FLOOR {
            for _ in 0..INNER_STEPS {
                let d: Vec<f64> = x
                    .iter()
                    .map(|v| (v * v + eps * eps).powf(1.0 - q / 2.0))
                    .collect();
                let x_new = weighted_min_norm(a, y, &d)?;
                let step = x_new
                    .iter()
                    .zip(&x)
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                let scale = 1.0 + x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                x = x_new;
                if step < 1e-12 * scale {
                    break;
                }
            }
            eps *= EPS_DECAY;
        }
        let score = smoothed_lq(&x, q, EPS_FLOOR);
        if best.as_ref().map_or(true, |(s, _)| score < *s) {
            best = Some((score, x));
        }
    }
    Ok(best.expect("two candidates evaluated").1)
}
