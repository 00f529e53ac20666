//! Two-phase primal simplex on a dense tableau.
//!
//! General-form programs (free variables, two-sided bounds, ≤/=) are
//! rewritten to standard form `min cᵀz, Az = b, z ≥ 0` by shifting and
//! splitting variables. Pivoting uses Dantzig's rule and falls back to
//! Bland's rule permanently once 1000 consecutive degenerate pivots are
//! seen, which guarantees termination. On `Optimal` the solver also
//! extracts a dual certificate from the final basis and records the duality
//! gap and dual-feasibility residual so callers can audit the answer.

use super::linalg;
use super::{ConstraintOp, LinearProgram, Sense};
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 1_000_000;
const DEGENERATE_LIMIT: usize = 1000;
const BLAND_AFTER: usize = 20_000;
const REFRESH_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point in the original variables (empty unless `Optimal`).
    pub point: Vec<f64>,
    /// Optimal objective value in the original sense.
    pub objective: f64,
    /// Dual objective of the standard-form reformulation (min sense).
    pub dual_objective: f64,
    /// Largest violation of dual feasibility `Aᵀy ≤ c` at the certificate.
    pub dual_residual: f64,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("simplex pivot limit of {MAX_PIVOTS} exceeded")]
    IterationLimit,
    #[error("numerical failure in simplex: {0}")]
    Numerical(String),
}

/// How an original variable is represented in standard form.
enum VarRepr {
    /// `x = lo + z[col]`
    Shifted { lo: f64, col: usize },
    /// `x = hi − z[col]`
    Mirrored { hi: f64, col: usize },
    /// `x = z[pos] − z[neg]`
    Split { pos: usize, neg: usize },
}

struct Standard {
    reprs: Vec<VarRepr>,
    ncols: usize,
    /// Equality rows `row·z = rhs` (before sign normalization).
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    /// Objective constant picked up while substituting variables.
    cost_shift: f64,
    /// Columns that are slacks (dual sign `y ≤ 0` in min form).
    slack_cols: Vec<usize>,
}

fn standardize(lp: &LinearProgram) -> Standard {
    let mut reprs = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0usize;
    // Extra rows produced by two-sided bounds: (col, upper-minus-lower).
    let mut range_rows: Vec<(usize, f64)> = Vec::new();
    for v in 0..lp.num_vars {
        let (lo, hi) = lp.bounds[v];
        if lo.is_finite() {
            let col = ncols;
            ncols += 1;
            if hi.is_finite() {
                range_rows.push((col, (hi - lo).max(0.0)));
            }
            reprs.push(VarRepr::Shifted { lo, col });
        } else if hi.is_finite() {
            let col = ncols;
            ncols += 1;
            reprs.push(VarRepr::Mirrored { hi, col });
        } else {
            let pos = ncols;
            let neg = ncols + 1;
            ncols += 2;
            reprs.push(VarRepr::Split { pos, neg });
        }
    }

    let nrows = lp.constraints.len() + range_rows.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nrows);
    let mut rhs: Vec<f64> = Vec::with_capacity(nrows);
    let mut le_rows: Vec<usize> = Vec::new();

    // Substitute variable representations into a linear expression.
    let emit = |expr: &super::LinExpr, ncols_total: usize| -> (Vec<f64>, f64) {
        let mut row = vec![0.0; ncols_total];
        let mut shift = expr.constant;
        for &(v, c) in &expr.terms {
            match reprs[v] {
                VarRepr::Shifted { lo, col } => {
                    row[col] += c;
                    shift += c * lo;
                }
                VarRepr::Mirrored { hi, col } => {
                    row[col] -= c;
                    shift += c * hi;
                }
                VarRepr::Split { pos, neg } => {
                    row[pos] += c;
                    row[neg] -= c;
                }
            }
        }
        (row, shift)
    };

    // Count slack columns first so the final width is known up front.
    let n_slacks = lp
        .constraints
        .iter()
        .filter(|(_, op)| *op == ConstraintOp::Le)
        .count()
        + range_rows.len();
    let total_cols = ncols + n_slacks;
    let mut next_slack = ncols;
    let mut slack_cols = Vec::new();

    for (expr, op) in &lp.constraints {
        let (mut row, shift) = emit(expr, total_cols);
        let b = -shift; // expr ⋈ 0  ⇒  row·z ⋈ −shift
        if *op == ConstraintOp::Le {
            row[next_slack] = 1.0;
            slack_cols.push(next_slack);
            le_rows.push(rows.len());
            next_slack += 1;
        }
        rows.push(row);
        rhs.push(b);
    }
    for &(col, width) in &range_rows {
        let mut row = vec![0.0; total_cols];
        row[col] = 1.0;
        row[next_slack] = 1.0;
        slack_cols.push(next_slack);
        le_rows.push(rows.len());
        next_slack += 1;
        rows.push(row);
        rhs.push(width);
    }

    let mut cost = vec![0.0; total_cols];
    let sign = if lp.sense == Sense::Min { 1.0 } else { -1.0 };
    let mut cost_shift = sign * lp.objective.constant;
    for &(v, c) in &lp.objective.terms {
        let c = sign * c;
        match reprs[v] {
            VarRepr::Shifted { lo, col } => {
                cost[col] += c;
                cost_shift += c * lo;
            }
            VarRepr::Mirrored { hi, col } => {
                cost[col] -= c;
                cost_shift += c * hi;
            }
            VarRepr::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    Standard { reprs, ncols: total_cols, rows, rhs, cost, cost_shift, slack_cols }
}

struct Tableau {
    /// `m × (n+1)`; last column is the right-hand side.
    t: Vec<Vec<f64>>,
    z: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    blacklist: Vec<bool>,
    pivots: usize,
    degenerate_run: usize,
    bland: bool,
    /// Current cost vector, kept so the reduced-cost row can be rebuilt
    /// from scratch periodically to shed accumulated rounding error.
    cost: Vec<f64>,
    /// The initial (sign-normalized) tableau `[A | b]`, used to refactorize:
    /// periodically rebuilding `t = B⁻¹[A | b]` from the pristine data sheds
    /// the rounding error accumulated by rank-one pivot updates.
    orig: Vec<Vec<f64>>,
}

enum LoopResult {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (v, p) in self.z.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Rebuilds the objective row for cost vector `c` from the current basis.
    fn set_costs(&mut self, cost: &[f64]) {
        self.cost = cost.to_vec();
        self.refresh_costs();
    }

    /// Recomputes the reduced-cost row from the stored cost vector.
    fn refresh_costs(&mut self) {
        let cost = &self.cost;
        let n = self.ncols;
        let mut z = vec![0.0; n + 1];
        z[..n].copy_from_slice(cost);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for j in 0..=n {
                    z[j] -= cb * self.t[r][j];
                }
            }
        }
        // Basic columns must read exactly zero.
        for &b in &self.basis {
            z[b] = 0.0;
        }
        self.z = z;
    }

    /// Rebuilds `t = B⁻¹·[A | b]` from the pristine data by Gauss–Jordan
    /// elimination on `[B | A | b]`, then refreshes the reduced costs.
    fn refactor(&mut self) -> Result<(), LpError> {
        if !self.try_refactor() {
            // A numerically singular basis leaves the incremental tableau in
            // place; the caller's verification loop still audits the result.
            self.refresh_costs();
        }
        Ok(())
    }

    fn try_refactor(&mut self) -> bool {
        let m = self.orig.len();
        let basis = self.basis.clone();
        let width = self.ncols + 1;
        // M = [B | A | b], reduced in place to [I | B⁻¹A | B⁻¹b].
        let mut mat: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row = Vec::with_capacity(m + width);
                for &bcol in &self.basis {
                    row.push(self.orig[r][bcol]);
                }
                row.extend_from_slice(&self.orig[r]);
                row
            })
            .collect();
        for k in 0..m {
            let piv = (k..m)
                .max_by(|&a, &b| mat[a][k].abs().total_cmp(&mat[b][k].abs()))
                .unwrap();
            if mat[piv][k].abs() < 1e-12 {
                return false;
            }
            mat.swap(k, piv);
            let inv = 1.0 / mat[k][k];
            for v in mat[k].iter_mut() {
                *v *= inv;
            }
            let pivot_row = mat[k].clone();
            for (i, row) in mat.iter_mut().enumerate() {
                if i != k {
                    let f = row[k];
                    if f != 0.0 {
                        for (v, p) in row.iter_mut().zip(&pivot_row) {
                            *v -= f * p;
                        }
                    }
                }
            }
        }
        // The left block is now the identity in physical row order, so row r
        // of the reduced matrix corresponds to basis entry r.
        for (r, row) in mat.iter().enumerate() {
            let dst = &mut self.t[r];
            dst.copy_from_slice(&row[m..]);
            // Basic columns read exactly unit.
            for (k, &bcol) in basis.iter().enumerate() {
                dst[bcol] = if k == r { 1.0 } else { 0.0 };
            }
        }
        self.refresh_costs();
        true
    }

    fn run(&mut self) -> Result<LoopResult, LpError> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::IterationLimit);
            }
            // Dantzig pricing can stall on degenerate vertices; fall back to
            // Bland's rule once the pivot count is clearly abnormal.
            if self.pivots > BLAND_AFTER {
                self.bland = true;
            }
            if self.pivots > 0 && self.pivots % REFRESH_EVERY == 0 {
                self.refactor()?;
            }
            let n = self.ncols;
            let entering = if self.bland {
                (0..n).find(|&j| !self.blacklist[j] && self.z[j] < -PIVOT_TOL)
            } else {
                (0..n)
                    .filter(|&j| !self.blacklist[j] && self.z[j] < -PIVOT_TOL)
                    .min_by(|&a, &b| self.z[a].total_cmp(&self.z[b]))
            };
            let c = match entering {
                Some(c) => c,
                None => return Ok(LoopResult::Optimal),
            };
            let mut best: Option<(usize, f64, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.t[r][n] / a;
                    let better = match best {
                        None => true,
                        Some((br, bratio, ba)) => {
                            ratio < bratio - 1e-12
                                || (ratio < bratio + 1e-12
                                    && (if self.bland {
                                        self.basis[r] < self.basis[br]
                                    } else {
                                        // Prefer the larger pivot element
                                        // among ties for stability.
                                        a > ba
                                    }))
                        }
                    };
                    if better {
                        best = Some((r, ratio, a));
                    }
                }
            }
            let (r, ratio) = match best {
                Some((r, ratio, _)) => (r, ratio),
                None => return Ok(LoopResult::Unbounded),
            };
            if ratio.abs() < 1e-9 {
                self.degenerate_run += 1;
                if self.degenerate_run >= DEGENERATE_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Runs the pivot loop to completion, refactorizes, and re-enters if the
/// refreshed reduced costs reveal the claimed optimum as premature.
fn run_verified(tab: &mut Tableau) -> Result<LoopResult, LpError> {
    for _ in 0..30 {
        let res = tab.run()?;
        tab.refactor()?;
        match res {
            LoopResult::Unbounded => return Ok(LoopResult::Unbounded),
            LoopResult::Optimal => {
                let n = tab.ncols;
                let reenter =
                    (0..n).any(|j| !tab.blacklist[j] && tab.z[j] < -PIVOT_TOL);
                if !reenter {
                    return Ok(LoopResult::Optimal);
                }
            }
        }
    }
    Ok(LoopResult::Optimal)
}

/// Solves a general-form linear program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let mut std_form = standardize(lp);
    let m = std_form.rows.len();
    let n = std_form.ncols;

    // Row equilibration: dividing each constraint by its largest coefficient
    // keeps pivot magnitudes comparable when row scales span many orders of
    // magnitude (template boxes vs. unit guard rows).
    for (row, b) in std_form.rows.iter_mut().zip(std_form.rhs.iter_mut()) {
        let norm = row.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for v in row.iter_mut() {
                *v *= inv;
            }
            *b *= inv;
        }
    }

    // Sign-normalize rows so every right-hand side is nonnegative, then add
    // one artificial column per row for a trivially feasible phase-1 start.
    let total = n + m;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in std_form.rows.iter().enumerate() {
        let flip = if std_form.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut full = vec![0.0; total + 1];
        for (j, &v) in row.iter().enumerate() {
            full[j] = flip * v;
        }
        full[n + i] = 1.0;
        full[total] = flip * std_form.rhs[i];
        t.push(full);
    }
    let basis: Vec<usize> = (n..n + m).collect();
    let mut blacklist = vec![false; total];
    let orig = t.clone();
    let mut tab = Tableau {
        t,
        z: vec![0.0; total + 1],
        basis,
        ncols: total,
        blacklist: blacklist.clone(),
        pivots: 0,
        degenerate_run: 0,
        bland: false,
        cost: vec![0.0; total],
        orig,
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![0.0; total];
    for j in n..total {
        phase1_cost[j] = 1.0;
    }
    tab.set_costs(&phase1_cost);
    run_verified(&mut tab)?;
    // Infeasibility is read from the basic artificial values themselves;
    // the incrementally-updated objective row is less trustworthy.
    let infeas: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b >= n)
        .map(|(r, _)| tab.t[r][total].max(0.0))
        .sum();
    if std::env::var_os("QAVA_LP_DEBUG").is_some() {
        let art_sum: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b >= n)
            .map(|(r, _)| tab.t[r][total])
            .sum();
        eprintln!(
            "[lp] m={m} n={n} phase1 z-residual {infeas:.3e} basic-artificial sum {art_sum:.3e} pivots {}",
            tab.pivots
        );
    }
    let scale = std_form.rhs.iter().fold(0.0f64, |m, &b| m.max(b.abs()));
    if infeas > 1e-9 * (1.0 + scale) {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            point: Vec::new(),
            objective: f64::NAN,
            dual_objective: f64::NAN,
            dual_residual: f64::NAN,
        });
    }

    // Drive leftover artificials out of the basis where possible.
    for r in 0..tab.basis.len() {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.t[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, c);
            }
        }
    }
    for j in n..total {
        blacklist[j] = true;
    }
    tab.blacklist = blacklist;
    tab.degenerate_run = 0;
    tab.bland = false;

    // Phase 2.
    let mut phase2_cost = vec![0.0; total];
    phase2_cost[..n].copy_from_slice(&std_form.cost);
    tab.set_costs(&phase2_cost);
    match run_verified(&mut tab)? {
        LoopResult::Unbounded => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                point: Vec::new(),
                objective: f64::NAN,
                dual_objective: f64::NAN,
                dual_residual: f64::NAN,
            })
        }
        LoopResult::Optimal => {}
    }

    // Recover the primal point in standard-form coordinates.
    let mut z_val = vec![0.0; total];
    for (r, &b) in tab.basis.iter().enumerate() {
        z_val[b] = tab.t[r][total];
    }
    let mut point = vec![0.0; lp.num_vars];
    for (v, repr) in std_form.reprs.iter().enumerate() {
        point[v] = match *repr {
            VarRepr::Shifted { lo, col } => lo + z_val[col],
            VarRepr::Mirrored { hi, col } => hi - z_val[col],
            VarRepr::Split { pos, neg } => z_val[pos] - z_val[neg],
        };
    }
    let std_obj = linalg::dot(&std_form.cost, &z_val[..n]) + std_form.cost_shift;
    let objective = if lp.sense == Sense::Min { std_obj } else { -std_obj };

    // Dual certificate: solve Bᵀy = c_B over the original (un-flipped) rows.
    let (dual_std, dual_residual) = dual_certificate(&std_form, &tab.basis, n);
    let dual_objective = if lp.sense == Sense::Min { dual_std } else { -dual_std };

    Ok(LpSolution { status: LpStatus::Optimal, point, objective, dual_objective, dual_residual })
}

/// Solves `Bᵀ y = c_B` for the final basis and reports `(bᵀy + shift,
/// max_j (yᵀA_j − c_j))`. Artificial basis columns (possible on degenerate
/// redundant rows) are treated as zero-cost unit columns.
fn dual_certificate(sf: &Standard, basis: &[usize], n: usize) -> (f64, f64) {
    let m = sf.rows.len();
    let mut bt = vec![vec![0.0; m]; m];
    let mut cb = vec![0.0; m];
    for (k, &col) in basis.iter().enumerate() {
        if col < n {
            for i in 0..m {
                bt[k][i] = sf.rows[i][col];
            }
            cb[k] = sf.cost[col];
        } else {
            // Artificial for row (col − n), possibly sign-flipped; the flip
            // does not matter for a zero-valued basic variable.
            bt[k][col - n] = 1.0;
            cb[k] = 0.0;
        }
    }
    let y = match linalg::solve(&bt, &cb) {
        Some(y) => y,
        None => return (f64::NAN, f64::NAN),
    };
    let dual_obj = linalg::dot(&y, &sf.rhs) + sf.cost_shift;
    let mut residual = 0.0f64;
    for j in 0..n {
        let mut yta = 0.0;
        for i in 0..m {
            yta += y[i] * sf.rows[i][j];
        }
        residual = residual.max(yta - sf.cost[j]);
    }
    // Slack columns additionally require y ≤ 0; they are unit columns with
    // zero cost, so the loop above already covers them.
    let _ = &sf.slack_cols;
    (dual_obj, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::LinExpr;

    fn le(terms: &[(usize, f64)], rhs: f64) -> LinExpr {
        let mut e = LinExpr::constant(-rhs);
        for &(i, c) in terms {
            e.add_term(i, c);
        }
        e
    }

    #[test]
    fn solves_small_max_problem() {
        // max 3x + 2y s.t. x + y ≤ 4, x + 3y ≤ 6, x,y ≥ 0 → (4,0), 12.
        let mut lp = LinearProgram::new(2, Sense::Max, {
            let mut o = LinExpr::term(0, 3.0);
            o.add_term(1, 2.0);
            o
        });
        lp.add_le(le(&[(0, 1.0), (1, 1.0)], 4.0));
        lp.add_le(le(&[(0, 1.0), (1, 3.0)], 6.0));
        lp.set_bounds(0, 0.0, f64::INFINITY);
        lp.set_bounds(1, 0.0, f64::INFINITY);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 12.0).abs() < 1e-9);
        assert!((sol.point[0] - 4.0).abs() < 1e-9);
        assert!(sol.dual_residual < 1e-9);
        assert!((sol.dual_objective - 12.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(1, Sense::Min, LinExpr::var(0));
        lp.add_le(le(&[(0, 1.0)], -1.0)); // x ≤ −1
        lp.add_le(le(&[(0, -1.0)], 0.0)); // x ≥ 0
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let lp = LinearProgram::new(1, Sense::Max, LinExpr::var(0));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn handles_free_variables_and_equalities() {
        // min x + y s.t. x + 2y = 3, x ≥ −5, y free → y = 4, x = −5, obj −1.
        let mut lp = LinearProgram::new(2, Sense::Min, {
            let mut o = LinExpr::var(0);
            o.add_term(1, 1.0);
            o
        });
        let mut eq = LinExpr::term(0, 1.0);
        eq.add_term(1, 2.0);
        eq.constant = -3.0;
        lp.add_eq(eq);
        lp.set_bounds(0, -5.0, f64::INFINITY);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9, "obj {}", sol.objective);
        assert!((sol.point[0] + 5.0).abs() < 1e-9);
        assert!((sol.point[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn respects_two_sided_bounds() {
        // min −x with 1 ≤ x ≤ 2.5 → x = 2.5.
        let mut lp = LinearProgram::new(1, Sense::Min, LinExpr::term(0, -1.0));
        lp.set_bounds(0, 1.0, 2.5);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.point[0] - 2.5).abs() < 1e-9);
    }
}
