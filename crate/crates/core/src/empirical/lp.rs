//! Dense two-phase simplex for small equality-form linear programs, and
//! the minimum-`l1` reconstruction built on it.
//!
//! The problems here are tiny by LP standards (a few hundred rows and
//! columns), so a dense tableau with Dantzig pricing is fast and simple;
//! Bland's rule kicks in after an iteration budget to rule out cycling.
//! Every solution is verified before it is returned: primal feasibility
//! against the original data, dual feasibility, and the duality gap. A
//! verification failure is an error, never a silent answer.

use super::mat::RowMat;
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

/// Verified optimum of `min c.x  s.t.  A x = b, x >= 0`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual vector `y` with `A^T y <= c` and `b.y = c.x`.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

struct Tableau {
    /// `m x (n_total + 1)` rows: structural cols, artificial cols, rhs.
    t: Vec<Vec<f64>>,
    /// Reduced-cost row (length `n_total + 1`; last entry is `-objective`).
    cost: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
    iterations: usize,
}

impl Tableau {
    fn new(a: &RowMat, b: &[f64]) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let n_total = n + m;
        let mut t = Vec::with_capacity(m);
        for i in 0..m {
            let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; n_total + 1];
            for j in 0..n {
                row[j] = flip * a.at(i, j);
            }
            row[n + i] = 1.0;
            row[n_total] = flip * b[i];
            t.push(row);
        }
        Self {
            t,
            cost: vec![0.0; n_total + 1],
            basis: (n..n_total).collect(),
            n_struct: n,
            n_total,
            iterations: 0,
        }
    }

    /// Rebuild the reduced-cost row for the given objective vector
    /// (length `n_total`; non-basic artificials are priced like any
    /// column but are barred from entering in phase 2).
    fn set_costs(&mut self, c: &[f64]) {
        let m = self.t.len();
        for j in 0..=self.n_total {
            let cj = if j < self.n_total { c[j] } else { 0.0 };
            let mut z = 0.0;
            for i in 0..m {
                z += c[self.basis[i]] * self.t[i][j];
            }
            self.cost[j] = cj - z;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= piv;
        }
        let prow = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, p) in r.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&prow) {
                *v -= f * p;
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Run the simplex loop on the current cost row. `allow_artificial`
    /// permits artificial columns to enter (phase 1 only).
    fn optimize(&mut self, allow_artificial: bool) -> Result<()> {
        let m = self.t.len();
        let bland_after = 20 * (m + self.n_total);
        let max_iter = 200 * (m + self.n_total) + 2000;
        loop {
            if self.iterations > max_iter {
                return Err(Error::LinearProgram(format!(
                    "simplex exceeded {max_iter} iterations"
                )));
            }
            let limit = if allow_artificial {
                self.n_total
            } else {
                self.n_struct
            };
            let bland = self.iterations > bland_after;
            // Entering column.
            let mut enter: Option<usize> = None;
            let mut best = -COST_TOL;
            for j in 0..limit {
                let r = self.cost[j];
                if r < best {
                    enter = Some(j);
                    if bland {
                        break; // first eligible index
                    }
                    best = r;
                }
            }
            let Some(col) = enter else { return Ok(()) };
            // Ratio test; ties go to the smallest basis index (lexicographic
            // enough for these sizes, and Bland's rule covers the rest).
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                let aij = self.t[i][col];
                if aij > PIVOT_TOL {
                    let ratio = self.t[i][self.n_total] / aij;
                    let better = ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && leave.map_or(true, |l| self.basis[i] < self.basis[l]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(row) = leave else {
                return Err(Error::LinearProgram("objective unbounded below".into()));
            };
            self.pivot(row, col);
        }
    }
}

/// Solve `min c.x  s.t.  A x = b, x >= 0` and verify the optimum.
pub fn solve_lp_eq(a: &RowMat, b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let mut tab = Tableau::new(a, b);

    // Phase 1: minimize the artificial sum.
    let mut c1 = vec![0.0; tab.n_total];
    for v in c1.iter_mut().skip(n) {
        *v = 1.0;
    }
    tab.set_costs(&c1);
    tab.optimize(true)?;
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let artificial_sum = -tab.cost[tab.n_total];
    if artificial_sum > 1e-7 * scale {
        return Err(Error::LinearProgram(format!(
            "infeasible: artificial residual {artificial_sum:.3e}"
        )));
    }
    // Drive basic artificials (at zero level) out where possible; a row
    // with no structural pivot is redundant and its artificial simply
    // stays basic at zero, barred from re-entering.
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[i][j].abs() > 1e-7) {
                tab.pivot(i, j);
            }
        }
    }

    // Phase 2: the real objective.
    let mut c2 = vec![0.0; tab.n_total];
    c2[..n].copy_from_slice(c);
    tab.set_costs(&c2);
    tab.optimize(false)?;

    let mut x = vec![0.0; n];
    for (i, &bi) in tab.basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab.t[i][tab.n_total];
        }
    }
    // Duals read off the artificial columns: their reduced cost in phase 2
    // is -y_i (cost 0, column e_i). Note y prices the sign-flipped rows;
    // undo the flips to price the original system.
    let dual: Vec<f64> = (0..m)
        .map(|i| {
            let y = -tab.cost[n + i];
            if b[i] < 0.0 {
                -y
            } else {
                y
            }
        })
        .collect();

    // Verification against the original data.
    let objective: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let ax = a.matvec(&x);
    for (i, (got, want)) in ax.iter().zip(b).enumerate() {
        if (got - want).abs() > 1e-7 * scale {
            return Err(Error::LinearProgram(format!(
                "verification failed: primal residual {:.3e} in row {i}",
                got - want
            )));
        }
    }
    if x.iter().any(|&v| v < -1e-9) {
        return Err(Error::LinearProgram(
            "verification failed: negative primal variable".into(),
        ));
    }
    let aty = dualize(a, &dual);
    for (j, (z, cj)) in aty.iter().zip(c).enumerate() {
        if *z > cj + 1e-7 * (1.0 + cj.abs()) {
            return Err(Error::LinearProgram(format!(
                "verification failed: dual infeasibility {:.3e} in column {j}",
                z - cj
            )));
        }
    }
    let by: f64 = b.iter().zip(&dual).map(|(bi, yi)| bi * yi).sum();
    if (objective - by).abs() > 1e-8 * (1.0 + objective.abs()) {
        return Err(Error::LinearProgram(format!(
            "verification failed: duality gap {:.3e}",
            objective - by
        )));
    }
    Ok(LpSolution {
        x,
        objective,
        dual,
        iterations: tab.iterations,
    })
}

fn dualize(a: &RowMat, y: &[f64]) -> Vec<f64> {
    a.t_matvec(y)
}

/// Minimum-`l1` reconstruction: `min ||x||_1  s.t.  A x = y`, solved as an
/// LP over the positive/negative parts `x = u - v`.
pub fn solve_l1(a: &RowMat, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(y.len(), m);
    let ext = RowMat::from_fn(m, 2 * n, |i, j| {
        if j < n {
            a.at(i, j)
        } else {
            -a.at(i, j - n)
        }
    });
    let c = vec![1.0; 2 * n];
    let sol = solve_lp_eq(&ext, y, &c)?;
    Ok((0..n).map(|j| sol.x[j] - sol.x[n + j]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_textbook_lp() {
        // min -3x1 - 5x2 s.t. x1 + s1 = 4; 2x2 + s2 = 12; 3x1 + 2x2 + s3 = 18.
        let a = RowMat::from_fn(3, 5, |i, j| {
            [
                [1.0, 0.0, 1.0, 0.0, 0.0],
                [0.0, 2.0, 0.0, 1.0, 0.0],
                [3.0, 2.0, 0.0, 0.0, 1.0],
            ][i][j]
        });
        let b = [4.0, 12.0, 18.0];
        let c = [-3.0, -5.0, 0.0, 0.0, 0.0];
        let sol = solve_lp_eq(&a, &b, &c).unwrap();
        assert_relative_eq!(sol.objective, -36.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn detects_infeasible_system() {
        // x1 = 1 and x1 = 2 cannot both hold.
        let a = RowMat::from_fn(2, 1, |_, _| 1.0);
        let err = solve_lp_eq(&a, &[1.0, 2.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::LinearProgram(_)));
    }

    #[test]
    fn detects_unbounded_objective() {
        // min -x1 with x1 - x2 = 1, both free to grow.
        let a = RowMat::from_fn(1, 2, |_, j| if j == 0 { 1.0 } else { -1.0 });
        let err = solve_lp_eq(&a, &[1.0], &[-1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::LinearProgram(_)));
    }

    #[test]
    fn negative_rhs_rows_are_handled() {
        // Same textbook LP with the second row negated.
        let a = RowMat::from_fn(3, 5, |i, j| {
            [
                [1.0, 0.0, 1.0, 0.0, 0.0],
                [0.0, -2.0, 0.0, -1.0, 0.0],
                [3.0, 2.0, 0.0, 0.0, 1.0],
            ][i][j]
        });
        let b = [4.0, -12.0, 18.0];
        let c = [-3.0, -5.0, 0.0, 0.0, 0.0];
        let sol = solve_lp_eq(&a, &b, &c).unwrap();
        assert_relative_eq!(sol.objective, -36.0, epsilon = 1e-9);
    }

    #[test]
    fn l1_recovers_sparse_vector_in_easy_regime() {
        // Well over the threshold (alpha = 0.7, beta ~ 0.1): basis pursuit
        // must recover the planted vector.
        let (n, m, k) = (40, 28, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut normal = || {
            // Box-Muller is overkill here; a sum of uniforms is fine for a
            // generic full-rank test matrix.
            (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0
        };
        let a = RowMat::from_fn(m, n, |_, _| normal());
        let mut x_true = vec![0.0; n];
        for i in (n - k)..n {
            x_true[i] = 1.0;
        }
        let y = a.matvec(&x_true);
        let x = solve_l1(&a, &y).unwrap();
        let err: f64 = x
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-7, "recovery error {err}");
    }

    #[test]
    fn l1_objective_matches_duality_certificate() {
        let (n, m) = (20, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = RowMat::from_fn(m, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let mut x0 = vec![0.0; n];
        x0[3] = 1.5;
        x0[17] = -0.5;
        let y = a.matvec(&x0);
        // solve_l1 going through solve_lp_eq already enforces the gap; we
        // additionally check the l1 norm is no worse than the plant.
        let x = solve_l1(&a, &y).unwrap();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        assert!(l1 <= 2.0 + 1e-9, "l1 {l1} exceeds planted norm");
    }
}
