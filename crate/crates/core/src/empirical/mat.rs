//! Minimal dense linear algebra for the empirical solvers: a row-major
//! matrix, a Cholesky solve for the weighted normal equations, and a
//! Householder QR used to extract an orthonormal nullspace basis.
//!
//! The matrices here are small (hundreds of rows) and dense by nature
//! (i.i.d. Gaussian designs), so simple O(n^3) routines are the right
//! tool; everything is allocation-explicit and deterministic.

use crate::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone)]
pub struct RowMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T y`.
    pub fn t_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    /// Weighted Gram matrix `A D A^T` with `D = diag(d)`.
    pub fn gram_weighted(&self, d: &[f64]) -> RowMat {
        assert_eq!(d.len(), self.cols);
        let m = self.rows;
        let mut g = RowMat::zeros(m, m);
        for i in 0..m {
            let ri = self.row(i);
            for j in i..m {
                let rj = self.row(j);
                let mut s = 0.0;
                for k in 0..self.cols {
                    s += ri[k] * d[k] * rj[k];
                }
                *g.at_mut(i, j) = s;
                *g.at_mut(j, i) = s;
            }
        }
        g
    }
}

/// Solve `A x = b` for symmetric positive definite `A` by Cholesky.
pub fn cholesky_solve(a: &RowMat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    // Lower factor, in place on a copy.
    let mut l = a.clone();
    for j in 0..n {
        let mut d = l.at(j, j);
        for k in 0..j {
            let ljk = l.at(j, k);
            d -= ljk * ljk;
        }
        if !(d > 0.0) {
            return Err(Error::LinearSolve(format!(
                "matrix not positive definite at pivot {j} (d = {d:.3e})"
            )));
        }
        let dj = d.sqrt();
        *l.at_mut(j, j) = dj;
        for i in (j + 1)..n {
            let mut s = l.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            *l.at_mut(i, j) = s / dj;
        }
    }
    // Forward then back substitution.
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l.at(i, k) * x[k];
        }
        x[i] /= l.at(i, i);
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l.at(k, i) * x[k];
        }
        x[i] /= l.at(i, i);
    }
    Ok(x)
}

/// Orthonormal basis of the nullspace of a full-row-rank `m x n` matrix
/// (`m < n`), as the `n x (n - m)` matrix of trailing Q columns from a
/// Householder QR of `A^T`.
pub fn nullspace_basis(a: &RowMat) -> Result<RowMat> {
    let (m, n) = (a.rows(), a.cols());
    if m >= n {
        return Err(Error::LinearSolve(format!(
            "nullspace basis needs a wide matrix, got {m} x {n}"
        )));
    }
    // B = A^T, n x m; factor with Householder reflections H_k = I - tau v v^T.
    let mut b = RowMat::from_fn(n, m, |i, j| a.at(j, i));
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut taus: Vec<f64> = Vec::with_capacity(m);
    for k in 0..m {
        // Householder vector for column k, rows k..n.
        let mut norm2 = 0.0;
        for i in k..n {
            norm2 += b.at(i, k) * b.at(i, k);
        }
        let norm = norm2.sqrt();
        if norm < 1e-12 {
            return Err(Error::LinearSolve(format!(
                "rank deficiency detected at column {k}"
            )));
        }
        let bkk = b.at(k, k);
        let alpha = if bkk >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        v[k] = bkk - alpha;
        for i in (k + 1)..n {
            v[i] = b.at(i, k);
        }
        let vtv: f64 = v[k..].iter().map(|x| x * x).sum();
        let tau = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
        // Apply to remaining columns of B.
        for j in k..m {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i] * b.at(i, j);
            }
            let s = tau * dot;
            for i in k..n {
                *b.at_mut(i, j) -= s * v[i];
            }
        }
        vs.push(v);
        taus.push(tau);
    }
    // Q e_j for j = m..n: apply H_k in reverse order to the unit vector.
    let d = n - m;
    let mut basis = RowMat::zeros(n, d);
    let mut col = vec![0.0; n];
    for (jc, j) in (m..n).enumerate() {
        col.iter_mut().for_each(|x| *x = 0.0);
        col[j] = 1.0;
        for k in (0..m).rev() {
            let v = &vs[k];
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i] * col[i];
            }
            let s = taus[k] * dot;
            for i in k..n {
                col[i] -= s * v[i];
            }
        }
        for i in 0..n {
            *basis.at_mut(i, jc) = col[i];
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RowMat {
        RowMat::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random_mat(&mut rng, 6, 9);
        let d = vec![1.0; 9];
        let g = b.gram_weighted(&d); // SPD with probability 1
        let x_true: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let rhs = g.matvec(&x_true);
        let x = cholesky_solve(&g, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = RowMat::zeros(2, 2);
        *a.at_mut(0, 0) = 1.0;
        *a.at_mut(1, 1) = -1.0;
        assert!(cholesky_solve(&a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn nullspace_is_orthonormal_and_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_mat(&mut rng, 5, 12);
        let nb = nullspace_basis(&a).unwrap();
        assert_eq!((nb.rows(), nb.cols()), (12, 7));
        // A N = 0.
        for j in 0..nb.cols() {
            let col: Vec<f64> = (0..nb.rows()).map(|i| nb.at(i, j)).collect();
            for v in a.matvec(&col) {
                assert!(v.abs() < 1e-10, "A N column residual {v}");
            }
        }
        // N^T N = I.
        for j1 in 0..nb.cols() {
            for j2 in j1..nb.cols() {
                let mut dot = 0.0;
                for i in 0..nb.rows() {
                    dot += nb.at(i, j1) * nb.at(i, j2);
                }
                let want = if j1 == j2 { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn weighted_gram_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_mat(&mut rng, 4, 7);
        let d: Vec<f64> = (0..7).map(|i| 0.5 + i as f64 * 0.25).collect();
        let g = a.gram_weighted(&d);
        for i in 0..4 {
            for j in 0..4 {
                let mut want = 0.0;
                for k in 0..7 {
                    want += a.at(i, k) * d[k] * a.at(j, k);
                }
                assert_relative_eq!(g.at(i, j), want, epsilon = 1e-12);
            }
        }
    }
}
