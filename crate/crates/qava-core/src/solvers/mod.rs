//! In-house optimization back ends: a bounded-variable primal simplex for
//! linear programs and a log-barrier interior-point method for convex
//! programs whose nonlinear constraints are sums of exponentials of affine
//! forms (solved in log-sum-exp form, never through a bare `exp`).

pub mod convex;
pub(crate) mod linalg;
pub mod simplex;

pub use convex::{solve_convex, ConvexProgram, ConvexSolution, ConvexStatus, ExpSumConstraint, ExpTerm};
pub use simplex::{solve_lp, LpError, LpSolution, LpStatus};

use serde::Serialize;

/// A sparse linear expression `Σ cᵢ·xᵢ + constant` over decision variables.
///
/// Terms are kept sorted by variable index with no duplicates and no
/// explicit zeros, so structural equality is semantic equality.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(idx: usize) -> Self {
        LinExpr { terms: vec![(idx, 1.0)], constant: 0.0 }
    }

    pub fn term(idx: usize, coeff: f64) -> Self {
        let mut e = LinExpr::default();
        e.add_term(idx, coeff);
        e
    }

    pub fn add_term(&mut self, idx: usize, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        match self.terms.binary_search_by_key(&idx, |&(i, _)| i) {
            Ok(pos) => {
                self.terms[pos].1 += coeff;
                if self.terms[pos].1 == 0.0 {
                    self.terms.remove(pos);
                }
            }
            Err(pos) => self.terms.insert(pos, (idx, coeff)),
        }
    }

    pub fn add(&mut self, other: &LinExpr) {
        self.add_scaled(other, 1.0);
    }

    pub fn add_scaled(&mut self, other: &LinExpr, factor: f64) {
        for &(i, c) in &other.terms {
            self.add_term(i, factor * c);
        }
        self.constant += factor * other.constant;
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            *self = LinExpr::constant(0.0);
            return;
        }
        for t in &mut self.terms {
            t.1 *= factor;
        }
        self.constant *= factor;
    }

    pub fn scaled(&self, factor: f64) -> LinExpr {
        let mut e = self.clone();
        e.scale(factor);
        e
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.add_scaled(other, -1.0);
        e
    }

    pub fn coeff(&self, idx: usize) -> f64 {
        match self.terms.binary_search_by_key(&idx, |&(i, _)| i) {
            Ok(pos) => self.terms[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn is_const(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates the expression at a full assignment of the variables.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for &(i, c) in &self.terms {
            v += c * x[i];
        }
        v
    }

    /// Dense coefficient vector of length `n` (constant not included).
    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; n];
        for &(i, c) in &self.terms {
            row[i] = c;
        }
        row
    }
}

/// Direction of a scalar constraint `expr ⋈ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintOp {
    /// `expr ≤ 0`
    Le,
    /// `expr = 0`
    Eq,
}

/// Optimization sense for linear programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// A linear program over `num_vars` variables. Constraints are normalized
/// to `expr ≤ 0` / `expr = 0`; per-variable bounds may be infinite.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: LinExpr,
    pub constraints: Vec<(LinExpr, ConstraintOp)>,
    /// `(lower, upper)` per variable; use `±f64::INFINITY` for free ends.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense, objective: LinExpr) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); num_vars],
        }
    }

    /// Adds `expr ≤ 0`.
    pub fn add_le(&mut self, expr: LinExpr) {
        self.constraints.push((expr, ConstraintOp::Le));
    }

    /// Adds `expr = 0`.
    pub fn add_eq(&mut self, expr: LinExpr) {
        self.constraints.push((expr, ConstraintOp::Eq));
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }
}

/// Allocates named decision variables shared by several constraint builders.
#[derive(Clone, Debug, Default)]
pub struct VarPool {
    names: Vec<String>,
}

impl VarPool {
    pub fn new() -> Self {
        VarPool::default()
    }

    pub fn fresh(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linexpr_merges_and_cancels_terms() {
        let mut e = LinExpr::term(3, 2.0);
        e.add_term(1, 1.0);
        e.add_term(3, -2.0);
        assert_eq!(e.terms, vec![(1, 1.0)]);
        e.add_scaled(&LinExpr::term(1, 2.0), 0.5);
        assert_eq!(e.coeff(1), 2.0);
        assert_eq!(e.eval(&[0.0, 3.0, 0.0, 9.0]), 6.0);
    }
}
