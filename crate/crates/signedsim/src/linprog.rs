//! Dense two-phase primal simplex for small equality-form linear programs:
//! minimize `c·x` subject to `A x = b`, `x ≥ 0`.
//!
//! Bland's rule (lowest-index entering column, lowest-index basic variable
//! on ratio ties) makes every run deterministic and cycle-free.  Redundant
//! equality rows are tolerated: their artificial variables simply stay
//! basic at zero after phase one.  Problem sizes in this crate are tiny
//! (tens of rows and columns), so a dense tableau is the right tool.

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug)]
pub(crate) enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    /// rows 0..m are constraints, row m is the objective (reduced costs,
    /// last entry = negated objective value)
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.basis.len();
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        for r in 0..=m {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..=self.n_cols {
                let delta = factor * self.rows[row][c];
                self.rows[r][c] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// One simplex phase over the allowed columns. Returns None on optimal.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool, max_iters: &mut usize) -> Option<LpOutcome> {
        let m = self.basis.len();
        loop {
            if *max_iters == 0 {
                return Some(LpOutcome::IterationLimit);
            }
            *max_iters -= 1;
            // Bland: lowest-index column with negative reduced cost
            let mut entering = None;
            for c in 0..self.n_cols {
                if allowed(c) && self.rows[m][c] < -PIVOT_TOL {
                    entering = Some(c);
                    break;
                }
            }
            let col = entering?;
            // ratio test; ties broken by lowest basic-variable index
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.rows[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.rows[r][self.n_cols] / a;
                    match leaving {
                        None => leaving = Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12
                                || ((ratio - bratio).abs() <= 1e-12
                                    && self.basis[r] < self.basis[br])
                            {
                                leaving = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Some(LpOutcome::Unbounded);
            };
            self.pivot(row, col);
        }
    }
}

/// Solve `min c·x  s.t.  A x = b, x ≥ 0`.
pub(crate) fn solve_equality_form(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    max_iters: usize,
) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);

    // n structural columns + m artificials + rhs
    let n_cols = n + m;
    let mut rows = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; n_cols + 1];
        for j in 0..n {
            row[j] = flip * a[i][j];
        }
        row[n + i] = 1.0;
        row[n_cols] = flip * b[i];
        rows.push(row);
    }
    // phase-1 objective: sum of artificials, priced out against the basis
    let mut obj = vec![0.0; n_cols + 1];
    obj[n..n_cols].fill(1.0);
    for row in rows.iter().take(m) {
        for (slot, v) in obj.iter_mut().zip(row) {
            *slot -= v;
        }
    }
    rows.push(obj);

    let mut tab = Tableau {
        rows,
        basis: (n..n_cols).collect(),
        n_cols,
    };
    let mut iters = max_iters;
    if let Some(out) = tab.run(&|_| true, &mut iters) {
        return out;
    }
    let phase1_obj = -tab.rows[m][n_cols];
    if phase1_obj > FEAS_TOL {
        return LpOutcome::Infeasible;
    }

    // phase 2: real costs priced out; artificials barred from entering
    let mut obj = vec![0.0; n_cols + 1];
    obj[..n].copy_from_slice(c);
    for i in 0..m {
        let bv = tab.basis[i];
        let cost = if bv < n { c[bv] } else { 0.0 };
        if cost != 0.0 {
            for (slot, v) in obj.iter_mut().zip(&tab.rows[i]) {
                *slot -= cost * v;
            }
        }
    }
    tab.rows[m] = obj;
    if let Some(out) = tab.run(&|col| col < n, &mut iters) {
        return out;
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.rows[i][n_cols].max(0.0);
        }
    }
    refine_basic_solution(a, b, &tab.basis, &mut x);
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal(LpSolution { x, objective })
}

/// Re-solve the final basis system against the original data to shed the
/// floating-point drift accumulated across pivots.
fn refine_basic_solution(a: &[Vec<f64>], b: &[f64], basis: &[usize], x: &mut [f64]) {
    let n = x.len();
    let cols: Vec<usize> = basis.iter().copied().filter(|&j| j < n).collect();
    let k = cols.len();
    if k == 0 {
        return;
    }
    // normal equations on the basis columns: (Bᵀ B) y = Bᵀ b
    let mut bt_b = vec![vec![0.0; k]; k];
    let mut bt_rhs = vec![0.0; k];
    for (ci, &jc) in cols.iter().enumerate() {
        for (cj, &jd) in cols.iter().enumerate() {
            bt_b[ci][cj] = a.iter().map(|row| row[jc] * row[jd]).sum();
        }
        bt_rhs[ci] = a.iter().zip(b).map(|(row, bi)| row[jc] * bi).sum();
    }
    if let Some(y) = gauss_solve(&mut bt_b, &mut bt_rhs) {
        if y.iter().all(|v| v.is_finite() && *v >= -1e-9) {
            // only accept a refinement that actually satisfies the system
            let mut x_new = vec![0.0; n];
            for (ci, &jc) in cols.iter().enumerate() {
                x_new[jc] = y[ci].max(0.0);
            }
            let old_res = residual(a, b, x);
            let new_res = residual(a, b, &x_new);
            if new_res <= old_res {
                x.copy_from_slice(&x_new);
            }
        }
    }
}

fn residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (row, &bi) in a.iter().zip(b) {
        let s: f64 = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
        worst = worst.max((s - bi).abs());
    }
    worst
}

fn gauss_solve(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let k = rhs.len();
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if mat[r][col].abs() > mat[piv][col].abs() {
                piv = r;
            }
        }
        if mat[piv][col].abs() < 1e-13 {
            return None;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..k {
            let f = mat[r][col] / mat[col][col];
            if f == 0.0 {
                continue;
            }
            let (upper, lower) = mat.split_at_mut(r);
            for (slot, pivot_val) in lower[0][col..k].iter_mut().zip(&upper[col][col..k]) {
                *slot -= f * pivot_val;
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut y = vec![0.0; k];
    for r in (0..k).rev() {
        let mut s = rhs[r];
        for cc in r + 1..k {
            s -= mat[r][cc] * y[cc];
        }
        y[r] = s / mat[r][r];
    }
    Some(y)
}
