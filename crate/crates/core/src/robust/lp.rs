//! Dense two-phase primal simplex for small linear programs.
//!
//! Solves `min c'x` subject to `A x = b` and per-variable boxes
//! `l <= x <= u` (finite `l`, possibly infinite `u`). Pricing is Dantzig's
//! most-negative reduced cost; after a run of degenerate pivots it switches
//! to Bland's smallest-index rule until progress resumes, which rules out
//! cycling. The final basis is refactorized from the original data with an
//! LU decomposition and optimality is re-certified on exact reduced costs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Reduced costs below `-OPT_TOL` disqualify a basis.
pub const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const PRICE_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 25;
const MAX_ITERATIONS: usize = 100_000;
const MAX_REFACTORIZATIONS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Minimizes `c'x` over `{x : a_eq x = b_eq, bounds[j].0 <= x_j <= bounds[j].1}`.
pub fn lp_solve(
    c: &[f64],
    a_eq: &DMatrix<f64>,
    b_eq: &[f64],
    bounds: &[(f64, f64)],
) -> Result<LpSolution> {
    let n = c.len();
    if a_eq.ncols() != n || a_eq.nrows() != b_eq.len() || bounds.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "c has {n} entries, A is {}x{}, b has {}, bounds has {}",
            a_eq.nrows(),
            a_eq.ncols(),
            b_eq.len(),
            bounds.len()
        )));
    }
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        if !lo.is_finite() || hi.is_nan() {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: format!("variable {j} needs a finite lower bound"),
            });
        }
        if hi < lo {
            return Err(Error::Infeasible);
        }
    }

    // Shift to y = x - l >= 0 and turn finite upper bounds into rows.
    let uppers: Vec<usize> = (0..n).filter(|&j| bounds[j].1.is_finite()).collect();
    let rows = a_eq.nrows() + uppers.len();
    let cols = n + uppers.len();
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    let lower = DVector::from_iterator(n, bounds.iter().map(|bd| bd.0));
    let shift = a_eq * &lower;
    for i in 0..a_eq.nrows() {
        for j in 0..n {
            a[(i, j)] = a_eq[(i, j)];
        }
        b[i] = b_eq[i] - shift[i];
    }
    for (r, &j) in uppers.iter().enumerate() {
        let row = a_eq.nrows() + r;
        a[(row, j)] = 1.0;
        a[(row, n + r)] = 1.0;
        b[row] = bounds[j].1 - bounds[j].0;
    }
    let mut cost = c.to_vec();
    cost.resize(cols, 0.0);

    let (y, iterations) = solve_standard(&cost, &a, &b)?;
    let x: Vec<f64> = (0..n).map(|j| y[j] + bounds[j].0).collect();
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution {
        x,
        objective,
        iterations,
    })
}

struct Tableau {
    /// Constraint rows, each `cols + 1` wide with the right-hand side last.
    rows: Vec<Vec<f64>>,
    /// Reduced costs, with `-objective` last.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Original row each tableau row came from.
    origin: Vec<usize>,
    /// Columns that may not enter.
    banned: Vec<bool>,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width();
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][j] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for k in 0..=w {
                    row[k] -= f * pivot_row[k];
                }
                row[j] = 0.0;
            }
        }
        let f = self.obj[j];
        if f != 0.0 {
            for k in 0..=w {
                self.obj[k] -= f * pivot_row[k];
            }
            self.obj[j] = 0.0;
        }
        self.basis[r] = j;
        self.iterations += 1;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width();
        self.obj = cost.to_vec();
        self.obj.push(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for k in 0..=w {
                    self.obj[k] -= cb * row[k];
                }
            }
        }
        for &j in &self.basis {
            self.obj[j] = 0.0;
        }
    }

    fn run(&mut self) -> Result<Outcome> {
        let w = self.width();
        let mut degenerate = 0usize;
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::Numeric("simplex iteration limit reached".into()));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -PRICE_TOL;
            for j in 0..w {
                if self.banned[j] || self.obj[j] >= best {
                    continue;
                }
                enter = Some(j);
                if bland {
                    break;
                }
                best = self.obj[j];
            }
            let Some(j) = enter else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[j];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[w].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j);
        }
    }
}

/// `min cost'y` subject to `a y = b`, `y >= 0`. Returns `y` and the pivot count.
fn solve_standard(cost: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let (m, n) = a.shape();
    if m == 0 {
        // Only the sign constraints remain.
        if cost.iter().any(|&c| c < 0.0) {
            return Err(Error::Unbounded);
        }
        return Ok((vec![0.0; n], 0));
    }
    let scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

    // Flip rows so every right-hand side is nonnegative.
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row: Vec<f64> = (0..n).map(|j| sign * a[(i, j)]).collect();
            row.push(sign * b[i]);
            row
        })
        .collect();

    // Reuse existing unit columns (slacks) as the starting basis; every other
    // row gets an artificial variable.
    let mut basis = vec![usize::MAX; m];
    for j in 0..n {
        let mut hit = None;
        let mut unit = true;
        for (i, row) in rows.iter().enumerate() {
            let v = row[j];
            if v == 0.0 {
                continue;
            }
            if v == 1.0 && hit.is_none() {
                hit = Some(i);
            } else {
                unit = false;
                break;
            }
        }
        if let (true, Some(i)) = (unit, hit) {
            if basis[i] == usize::MAX {
                basis[i] = j;
            }
        }
    }
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| basis[i] == usize::MAX).collect();
    let n_art = artificial_rows.len();
    let width = n + n_art;
    for row in rows.iter_mut() {
        let rhs = row.pop().expect("row has a right-hand side");
        row.resize(width, 0.0);
        row.push(rhs);
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        rows[i][n + k] = 1.0;
        basis[i] = n + k;
    }

    let mut tab = Tableau {
        rows,
        obj: vec![0.0; width + 1],
        basis,
        origin: (0..m).collect(),
        banned: vec![false; width],
        iterations: 0,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; width];
        for c in phase1.iter_mut().skip(n) {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        if let Outcome::Unbounded = tab.run()? {
            return Err(Error::Numeric("phase one reported unbounded".into()));
        }
        let infeasibility = -tab.obj[width];
        if infeasibility > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        drive_out_artificials(&mut tab, n);
    }
    for j in n..width {
        tab.banned[j] = true;
    }

    let mut phase2 = cost.to_vec();
    phase2.resize(width, 0.0);
    tab.set_costs(&phase2);
    for _ in 0..=MAX_REFACTORIZATIONS {
        if let Outcome::Unbounded = tab.run()? {
            return Err(Error::Unbounded);
        }
        match certify(&mut tab, cost, a, b, n)? {
            Some(y) => return Ok((y, tab.iterations)),
            None => continue,
        }
    }
    Err(Error::Numeric(
        "reduced costs failed certification after refactorization".into(),
    ))
}

fn drive_out_artificials(tab: &mut Tableau, n: usize) {
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] < n {
            r += 1;
            continue;
        }
        let j = (0..n)
            .filter(|&j| tab.rows[r][j].abs() > 1e-9)
            .max_by(|&x, &y| tab.rows[r][x].abs().total_cmp(&tab.rows[r][y].abs()));
        match j {
            Some(j) => {
                tab.pivot(r, j);
                r += 1;
            }
            None => {
                // The row is a combination of the others.
                tab.rows.remove(r);
                tab.basis.remove(r);
                tab.origin.remove(r);
            }
        }
    }
}

/// Recomputes the basic solution and reduced costs from the original data.
/// Returns the solution if the basis is primal feasible and optimal;
/// otherwise rebuilds the tableau from the factorization and returns `None`.
fn certify(
    tab: &mut Tableau,
    cost: &[f64],
    a: &DMatrix<f64>,
    b: &[f64],
    n: usize,
) -> Result<Option<Vec<f64>>> {
    let m = tab.rows.len();
    if m == 0 {
        if cost.iter().any(|&c| c < -OPT_TOL) {
            return Err(Error::Unbounded);
        }
        return Ok(Some(vec![0.0; n]));
    }
    let basis_matrix = DMatrix::from_fn(m, m, |i, k| a[(tab.origin[i], tab.basis[k])]);
    let lu = basis_matrix.clone().lu();
    let rhs = DVector::from_iterator(m, tab.origin.iter().map(|&i| b[i]));
    let xb = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular basis".into()))?;
    let cb = DVector::from_iterator(m, tab.basis.iter().map(|&j| cost[j]));
    let duals = basis_matrix
        .transpose()
        .lu()
        .solve(&cb)
        .ok_or_else(|| Error::Numeric("singular basis".into()))?;
    let reduced: Vec<f64> = (0..n)
        .map(|j| {
            let col: f64 = (0..m).map(|i| a[(tab.origin[i], j)] * duals[i]).sum();
            cost[j] - col
        })
        .collect();
    let feasible = xb.iter().all(|&v| v >= -1e-9);
    let optimal = reduced.iter().all(|&r| r >= -OPT_TOL);
    if feasible && optimal {
        let mut y = vec![0.0; n];
        for (k, &j) in tab.basis.iter().enumerate() {
            y[j] = xb[k].max(0.0);
        }
        return Ok(Some(y));
    }
    if !feasible {
        return Err(Error::Numeric(
            "basis lost primal feasibility to roundoff".into(),
        ));
    }
    // Replace the drifted tableau with B^-1 [A | b] and the exact reduced costs.
    let width = tab.width();
    let full = DMatrix::from_fn(m, n, |i, j| a[(tab.origin[i], j)]);
    let body = lu
        .solve(&full)
        .ok_or_else(|| Error::Numeric("singular basis".into()))?;
    for i in 0..m {
        for j in 0..n {
            tab.rows[i][j] = body[(i, j)];
        }
        for j in n..width {
            tab.rows[i][j] = 0.0;
        }
        tab.rows[i][width] = xb[i];
    }
    tab.obj[..n].copy_from_slice(&reduced[..n]);
    for j in n..width {
        tab.obj[j] = 0.0;
    }
    tab.obj[width] = -cb.dot(&xb);
    for &j in &tab.basis {
        tab.obj[j] = 0.0;
    }
    Ok(None)
}
