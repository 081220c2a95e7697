//! Dense tableau simplex for small maximization problems in the form
//! max c'x s.t. Ax <= b, x >= 0 with b >= 0, which is all the LP relaxation
//! here ever produces. Slack variables give the starting basis, so no phase
//! one is needed. Dantzig pricing with a Bland fallback against cycling.
//! Solutions carry duals and are checked against a feasibility and
//! duality-gap certificate before being returned.

use crate::error::{Error, Result};

/// Pivot magnitude below which an entry counts as zero.
const PIVOT_EPS: f64 = 1e-9;

/// Certificate tolerance on feasibility residuals and the duality gap.
pub const LP_TOL: f64 = 1e-6;

/// Degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 64;

pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub duals: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, objective: Vec<f64>) -> Self {
        assert_eq!(num_vars, objective.len());
        LinearProgram { num_vars, objective, rows: Vec::new() }
    }

    /// Adds the constraint sum coeffs <= rhs. Requires rhs >= 0.
    pub fn add_row_leq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.num_vars));
        self.rows.push((coeffs, rhs));
    }

    pub fn maximize(&self) -> Result<LpSolution> {
        let n = self.num_vars;
        let m = self.rows.len();
        let width = n + m + 1;
        for (i, (_, b)) in self.rows.iter().enumerate() {
            if !(*b >= 0.0) || !b.is_finite() {
                return Err(Error::Lp(format!("row {i} has right-hand side {b}")));
            }
        }

        // Tableau rows: structural columns, slack identity, rhs last.
        let mut t: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for (i, (coeffs, b)) in self.rows.iter().enumerate() {
            let mut row = vec![0.0; width];
            for &(j, a) in coeffs {
                row[j] += a;
            }
            row[n + i] = 1.0;
            row[width - 1] = *b;
            t.push(row);
        }
        // Reduced-cost row starts as -c; optimality when all entries >= 0.
        let mut cost = vec![0.0; width];
        for j in 0..n {
            cost[j] = -self.objective[j];
        }
        let mut basis: Vec<usize> = (n..n + m).collect();

        let max_iters = 10_000 + 100 * (n + m);
        let mut stall = 0usize;
        for _ in 0..max_iters {
            let entering = if stall < STALL_LIMIT {
                // Dantzig: most negative reduced cost.
                let mut best = None;
                for j in 0..n + m {
                    if cost[j] < -PIVOT_EPS
                        && best.map_or(true, |(_, c)| cost[j] < c)
                    {
                        best = Some((j, cost[j]));
                    }
                }
                best.map(|(j, _)| j)
            } else {
                (0..n + m).find(|&j| cost[j] < -PIVOT_EPS)
            };
            let Some(e) = entering else {
                return self.extract(&t, &cost, &basis);
            };

            // Ratio test; ties go to the smallest basis variable, which
            // keeps Bland's rule honest when it is active.
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in t.iter().enumerate() {
                if row[e] > PIVOT_EPS {
                    let ratio = row[width - 1] / row[e];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_EPS
                                || (ratio < lr + PIVOT_EPS && basis[i] < basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Lp(format!("unbounded in column {e}")));
            };
            stall = if ratio.abs() <= PIVOT_EPS { stall + 1 } else { 0 };

            let pivot = t[r][e];
            for v in t[r].iter_mut() {
                *v /= pivot;
            }
            for i in 0..m {
                if i != r && t[i][e].abs() > 0.0 {
                    let f = t[i][e];
                    let (pr, row) = if i < r {
                        let (a, b) = t.split_at_mut(r);
                        (&b[0], &mut a[i])
                    } else {
                        let (a, b) = t.split_at_mut(i);
                        (&a[r], &mut b[0])
                    };
                    for (x, p) in row.iter_mut().zip(pr.iter()) {
                        *x -= f * p;
                    }
                }
            }
            let f = cost[e];
            if f.abs() > 0.0 {
                for (x, p) in cost.iter_mut().zip(t[r].iter()) {
                    *x -= f * p;
                }
            }
            basis[r] = e;
        }
        Err(Error::Lp("iteration limit reached".to_string()))
    }

    fn extract(&self, t: &[Vec<f64>], cost: &[f64], basis: &[usize]) -> Result<LpSolution> {
        let n = self.num_vars;
        let m = self.rows.len();
        let width = n + m + 1;
        let mut x = vec![0.0; n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = t[i][width - 1];
            }
        }
        let duals: Vec<f64> = (0..m).map(|i| cost[n + i]).collect();
        let value: f64 = (0..n).map(|j| self.objective[j] * x[j]).sum();
        self.certify(&x, value, &duals)?;
        Ok(LpSolution { x, value, duals })
    }

    /// Weak-duality certificate: primal and dual feasibility plus a closed
    /// duality gap. Rejecting here turns silent numerical drift into a hard
    /// error.
    fn certify(&self, x: &[f64], value: f64, duals: &[f64]) -> Result<()> {
        for (j, &v) in x.iter().enumerate() {
            if v < -LP_TOL {
                return Err(Error::Lp(format!("negative primal value {v} at {j}")));
            }
        }
        let mut dual_value = 0.0;
        let mut reduced = self.objective.clone();
        for (i, (coeffs, b)) in self.rows.iter().enumerate() {
            let y = duals[i];
            if y < -LP_TOL {
                return Err(Error::Lp(format!("negative dual value {y} at row {i}")));
            }
            let lhs: f64 = coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            if lhs > b + LP_TOL * b.abs().max(1.0) {
                return Err(Error::Lp(format!("row {i} violated: {lhs} > {b}")));
            }
            dual_value += y * b;
            for &(j, a) in coeffs {
                reduced[j] -= y * a;
            }
        }
        for (j, &rc) in reduced.iter().enumerate() {
            if rc > LP_TOL {
                return Err(Error::Lp(format!("dual infeasible at column {j}: {rc}")));
            }
        }
        let gap = (value - dual_value).abs();
        if gap > LP_TOL * value.abs().max(1.0) {
            return Err(Error::Lp(format!("duality gap {gap}")));
        }
        Ok(())
    }
}
