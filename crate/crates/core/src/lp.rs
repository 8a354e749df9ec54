//! Dense two-phase simplex with Bland's rule.

use crate::error::{invalid, Error, Result};

pub const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per constraint row, signed so that weak duality reads
    /// `value = b . duals` at optimality.
    pub duals: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i].abs() < 1e-15 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (rj, t) in r.iter_mut().zip(&self.rows[i]) {
                    *rj -= cb * t;
                }
            }
        }
        r
    }

    /// Minimizes `cost` over columns `< allowed`; Bland's rule throughout.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > 1_000_000 {
                return Err(Error::Lp("not converging"));
            }
            let reduced = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| reduced[j] < -COST_TOL * scale) else {
                return Ok(());
            };
            let mut leave: Option<(f64, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    let better = match leave {
                        None => true,
                        Some((r, _, b)) => ratio < r || (ratio == r && self.basis[i] < b),
                    };
                    if better {
                        leave = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = leave else {
                return Err(Error::Lp("unbounded"));
            };
            self.pivot(r, enter);
        }
    }
}

/// `min c.x` subject to `A x = b`, `x >= 0`.
pub fn minimize_standard(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return invalid("constraint matrix shape does not match");
    }
    if c.iter().chain(b).chain(a.iter().flatten()).any(|v| !v.is_finite()) {
        return invalid("linear program data must be finite");
    }
    let cols = n + m;
    let mut sign = vec![1.0; m];
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        if b[i] < 0.0 {
            sign[i] = -1.0;
        }
        let mut row: Vec<f64> = a[i].iter().map(|v| v * sign[i]).collect();
        row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
        rows.push(row);
        rhs.push(b[i] * sign[i]);
    }
    let mut t = Tableau { rows, rhs, basis: (n..cols).collect(), cols };

    let phase1: Vec<f64> = (0..cols).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    t.optimize(&phase1, n)?;
    let infeasibility: f64 = t.basis.iter().zip(&t.rhs).filter(|(&bv, _)| bv >= n).map(|(_, r)| r).sum();
    let bscale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if infeasibility > 1e-9 * bscale {
        return Err(Error::Lp("infeasible"));
    }
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[i][j].abs() > 1e-9) {
                t.pivot(i, j);
            }
        }
    }

    let mut cost = c.to_vec();
    cost.resize(t.cols, 0.0);
    t.optimize(&cost, n)?;

    let mut x = vec![0.0; n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs[i].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // B^{-1} sits in the artificial columns; y = c_B B^{-1}.
    let duals = (0..m)
        .map(|i| sign[i] * t.basis.iter().enumerate().map(|(k, &bv)| cost[bv] * t.rows[k][n + i]).sum::<f64>())
        .collect();
    Ok(LpSolution { x, value, duals })
}

/// `max c.x` subject to `A x <= b`, `x >= 0`; duals are nonnegative.
pub fn maximize_packing(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    let rows: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut cost: Vec<f64> = c.iter().map(|v| -v).collect();
    cost.resize(n + m, 0.0);
    let sol = minimize_standard(&cost, &rows, b)?;
    Ok(LpSolution { x: sol.x[..n].to_vec(), value: -sol.value, duals: sol.duals.iter().map(|y| -y).collect() })
}

/// `min c.x` subject to `A x >= b`, `x >= 0`; duals are nonnegative.
pub fn minimize_covering(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    let rows: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..m).map(|k| if k == i { -1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut cost = c.to_vec();
    cost.resize(n + m, 0.0);
    let sol = minimize_standard(&cost, &rows, b)?;
    Ok(LpSolution { x: sol.x[..n].to_vec(), value: sol.value, duals: sol.duals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_packing() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2,6)
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let s = maximize_packing(&[3.0, 5.0], &a, &[4.0, 12.0, 18.0]).unwrap();
        assert!((s.value - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        let dual: f64 = s.duals.iter().zip([4.0, 12.0, 18.0]).map(|(y, b)| y * b).sum();
        assert!((dual - 36.0).abs() < 1e-9);
        assert!(s.duals.iter().all(|&y| y >= -1e-12));
    }

    #[test]
    fn covering_matches_packing_dual() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]];
        let w = [1.0, 2.0, 1.5];
        let cover = minimize_covering(&w, &a, &[1.0, 1.0, 1.0]).unwrap();
        let at: Vec<Vec<f64>> = (0..3).map(|j| (0..3).map(|i| a[i][j]).collect()).collect();
        let pack = maximize_packing(&[1.0, 1.0, 1.0], &at, &w).unwrap();
        assert!((cover.value - pack.value).abs() < 1e-9);
        assert!((cover.duals.iter().sum::<f64>() - cover.value).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        assert!(matches!(minimize_standard(&[1.0], &[vec![1.0], vec![1.0]], &[1.0, 2.0]), Err(Error::Lp("infeasible"))));
        assert!(matches!(maximize_packing(&[1.0, 1.0], &[vec![1.0, 0.0]], &[1.0]), Err(Error::Lp("unbounded"))));
    }
}
