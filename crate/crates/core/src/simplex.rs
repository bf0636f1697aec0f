//! Dense two-phase simplex for small standard-form linear programs:
//! minimize `cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Pivoting uses Bland's rule (smallest eligible index enters; ratio ties
//! resolved toward the smallest basic index), which is deterministic and
//! immune to cycling.  The solver also reports the price (dual) vector of
//! the equality constraints, recovered from the reduced costs of the
//! artificial columns.

/// Entries smaller than this are treated as zero in pivoting.
const PIVOT_TOL: f64 = 1e-9;
/// Reduced costs above `-COST_TOL` count as optimal.
const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexError {
    /// Phase 1 could not reach zero; the residual infeasibility is attached.
    Infeasible(f64),
    Unbounded,
    /// The pivot cap was exhausted; indicates numerical degeneracy.
    IterationLimit(usize),
}

impl std::fmt::Display for SimplexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimplexError::Infeasible(r) => write!(f, "infeasible (phase-1 residual {r:.3e})"),
            SimplexError::Unbounded => write!(f, "unbounded"),
            SimplexError::IterationLimit(n) => write!(f, "no convergence within {n} pivots"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    /// Optimal values of the original variables.
    pub x: Vec<f64>,
    /// Optimal objective `cᵀx`.
    pub objective: f64,
    /// Total pivots across both phases.
    pub iterations: usize,
    /// Price vector π of the equality constraints: at optimality the reduced
    /// cost `c_j − πᵀA_j` is nonnegative for every column j.
    pub prices: Vec<f64>,
}

struct Tableau {
    /// m rows × (n + m artificials + 1 rhs).
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
    iterations: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.n + self.m
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        for r in 0..self.m {
            if r != row {
                let factor = self.rows[r][col];
                if factor != 0.0 {
                    for c in 0..=self.rhs_col() {
                        let delta = factor * self.rows[row][c];
                        self.rows[r][c] -= delta;
                    }
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for c in 0..=self.rhs_col() {
                self.cost[c] -= factor * self.rows[row][c];
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Run simplex pivots until optimal; columns in `n..limit` are eligible
    /// to enter (phase 2 passes `limit = n` to lock artificials out).
    fn optimize(&mut self, enter_limit: usize, cap: usize) -> Result<(), SimplexError> {
        loop {
            if self.iterations > cap {
                return Err(SimplexError::IterationLimit(cap));
            }
            // Bland: smallest index with a negative reduced cost.
            let entering = (0..enter_limit).find(|&j| self.cost[j] < -COST_TOL);
            let entering = match entering {
                None => return Ok(()),
                Some(j) => j,
            };
            // Ratio test; ties resolved toward the smallest basic index.
            let rhs = self.rhs_col();
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.rows[r][entering];
                if a > PIVOT_TOL {
                    let ratio = self.rows[r][rhs] / a;
                    let better = match leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio <= lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            match leaving {
                None => return Err(SimplexError::Unbounded),
                Some((row, _)) => self.pivot(row, entering),
            }
        }
    }
}

/// Solve `min cᵀx  s.t.  Ax = b, x ≥ 0` by two-phase dense simplex with
/// Bland's rule.  `a` holds the m constraint rows, each of length n.
pub fn solve_standard_form(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    iteration_cap: usize,
) -> Result<SimplexSolution, SimplexError> {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    for row in a {
        assert_eq!(row.len(), n);
    }

    // Flip rows with negative rhs so the artificial start is feasible.
    let mut flip = vec![1.0f64; m];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for r in 0..m {
        let s = if b[r] < 0.0 { -1.0 } else { 1.0 };
        flip[r] = s;
        let mut row: Vec<f64> = a[r].iter().map(|&v| s * v).collect();
        row.extend(std::iter::repeat(0.0).take(m)); // artificials
        row.push(s * b[r]);
        row[n + r] = 1.0;
        rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    let mut cost = vec![0.0; n + m + 1];
    for j in n..n + m {
        cost[j] = 1.0;
    }
    // Zero out the reduced costs of the (basic) artificial columns.
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), n, m, iterations: 0 };
    for r in 0..m {
        let factor = t.cost[n + r];
        if factor != 0.0 {
            for cidx in 0..=t.rhs_col() {
                let delta = factor * t.rows[r][cidx];
                t.cost[cidx] -= delta;
            }
        }
    }
    t.optimize(n + m, iteration_cap)?;
    let phase1 = -t.cost[t.rhs_col()];
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if phase1 > 1e-7 * scale {
        return Err(SimplexError::Infeasible(phase1));
    }

    // Drive basic artificials out where possible; leftover rows are
    // redundant and their artificials stay basic at zero.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[r][j].abs() > PIVOT_TOL) {
                t.pivot(r, j);
            }
        }
    }

    // Phase 2: restore the real objective, lock artificials out.
    let rhs = t.rhs_col();
    t.cost = vec![0.0; rhs + 1];
    t.cost[..n].copy_from_slice(c);
    for r in 0..t.m {
        let factor = t.cost[t.basis[r]];
        if factor != 0.0 {
            for cidx in 0..=rhs {
                let delta = factor * t.rows[r][cidx];
                t.cost[cidx] -= delta;
            }
        }
    }
    t.optimize(n, iteration_cap)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rows[r][rhs];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // Price recovery: with zero phase-2 cost on artificial column r (a unit
    // column of the sign-flipped system), its reduced cost is −π_r.
    let prices: Vec<f64> = (0..m).map(|r| -t.cost[n + r] * flip[r]).collect();

    Ok(SimplexSolution { x, objective, iterations: t.iterations, prices })
}
