//! Interior-point solver for convex programs with a linear objective,
//! affine constraints, and "exponential-sum" constraints of the shape
//!
//! `Σ_t  w_t · exp(e_t(x)) · Π_k mgf_U[lo,hi](γ_k(x))  ≤  1`
//!
//! with `w_t > 0`, `e_t`/`γ_k` affine. Each such constraint is handled in
//! log-sum-exp form (with max-shift, never a bare exponential), which is
//! smooth and convex, and the whole program is solved with a log-barrier
//! method using damped Newton steps. Equality constraints are eliminated
//! up front by restriction to their affine solution set.

use super::linalg;
use super::{LinExpr, LinearProgram, LpStatus, Sense};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct ConvexSolution {
    pub status: ConvexStatus,
    pub point: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Error)]
pub enum ConvexError {
    #[error("Newton iteration limit exceeded in barrier stage")]
    IterationLimit,
    #[error("numerical failure in convex solver: {0}")]
    Numerical(String),
    #[error("linear subproblem failed: {0}")]
    Lp(#[from] super::simplex::LpError),
}

/// One weighted exponential term `w · exp(e(x)) · Π mgf_U(γ(x))`.
#[derive(Clone, Debug)]
pub struct ExpTerm {
    pub weight: f64,
    pub exponent: LinExpr,
    /// `(lo, hi, γ)` factors: moment generating functions of `Uniform(lo,hi)`
    /// evaluated at the affine argument `γ(x)`.
    pub uniform_mgfs: Vec<(f64, f64, LinExpr)>,
}

/// `Σ terms ≤ 1`, enforced as `logsumexp ≤ 0`.
#[derive(Clone, Debug)]
pub struct ExpSumConstraint {
    pub terms: Vec<ExpTerm>,
}

#[derive(Clone, Debug, Default)]
pub struct ConvexProgram {
    pub num_vars: usize,
    /// Minimized.
    pub objective: LinExpr,
    /// Affine constraints `expr ≤ 0`.
    pub lin_le: Vec<LinExpr>,
    /// Affine constraints `expr = 0`.
    pub lin_eq: Vec<LinExpr>,
    pub exp_sums: Vec<ExpSumConstraint>,
}

const NEWTON_STEP_LIMIT: usize = 2000;
const BARRIER_FACTOR: f64 = 10.0;
const MAX_STAGES: usize = 80;

/// log(sinh(x)/x) and its first two derivatives, stable over all of ℝ.
fn log_sinhc(x: f64) -> (f64, f64, f64) {
    let ax = x.abs();
    if ax < 1e-4 {
        let x2 = x * x;
        (x2 / 6.0 - x2 * x2 / 180.0, x / 3.0 - x * x2 / 45.0, 1.0 / 3.0 - x2 / 15.0)
    } else if ax <= 30.0 {
        let v = (ax.sinh() / ax).ln();
        let coth = ax.cosh() / ax.sinh();
        let d1 = coth - 1.0 / ax;
        let csch2 = 1.0 / (ax.sinh() * ax.sinh());
        let d2 = 1.0 / (ax * ax) - csch2;
        (v, d1 * x.signum(), d2)
    } else {
        // sinh(x) ≈ e^|x|/2 to double precision here.
        (ax - (2.0 * ax).ln(), (1.0 - 1.0 / ax) * x.signum(), 1.0 / (ax * ax))
    }
}

/// Log of the Uniform(lo,hi) moment generating function at `g`, with first
/// and second derivatives in `g`.
pub fn log_uniform_mgf(lo: f64, hi: f64, g: f64) -> (f64, f64, f64) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let (v, d1, d2) = log_sinhc(g * half);
    (g * mid + v, mid + half * d1, half * half * d2)
}

/// Scalar functions `g_i(u) ≤ 0` in the reduced coordinates.
enum Fun {
    Affine(Vec<f64>, f64),
    Lse(Vec<LseTerm>),
}

struct LseTerm {
    /// ln(weight) + constant part of the exponent.
    base: f64,
    coeffs: Vec<f64>,
    mgfs: Vec<(f64, f64, Vec<f64>, f64)>, // lo, hi, γ coeffs, γ constant
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    /// None for affine functions (zero Hessian).
    hess: Option<Vec<Vec<f64>>>,
}

impl Fun {
    fn eval(&self, u: &[f64], want_hess: bool) -> Eval {
        match self {
            Fun::Affine(c, b) => {
                Eval { value: linalg::dot(c, u) + b, grad: c.clone(), hess: None }
            }
            Fun::Lse(terms) => eval_lse(terms, u, want_hess),
        }
    }
}

fn eval_lse(terms: &[LseTerm], u: &[f64], want_hess: bool) -> Eval {
    let n = u.len();
    // Per-term exponent s_t, gradient, and diagonal-free Hessian pieces.
    let mut s = Vec::with_capacity(terms.len());
    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(terms.len());
    let mut curvs: Vec<Vec<(f64, Vec<f64>)>> = Vec::with_capacity(terms.len());
    for t in terms {
        let mut v = t.base + linalg::dot(&t.coeffs, u);
        let mut g = t.coeffs.clone();
        let mut curv = Vec::new();
        for (lo, hi, gc, gb) in &t.mgfs {
            let gamma = linalg::dot(gc, u) + gb;
            let (pv, p1, p2) = log_uniform_mgf(*lo, *hi, gamma);
            v += pv;
            for (gi, ci) in g.iter_mut().zip(gc) {
                *gi += p1 * ci;
            }
            if p2 != 0.0 {
                curv.push((p2, gc.clone()));
            }
        }
        s.push(v);
        grads.push(g);
        curvs.push(curv);
    }
    let smax = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut p: Vec<f64> = Vec::with_capacity(s.len());
    for &si in &s {
        let e = (si - smax).exp();
        p.push(e);
        z += e;
    }
    for pi in &mut p {
        *pi /= z;
    }
    let value = smax + z.ln();
    let mut grad = vec![0.0; n];
    for (pi, g) in p.iter().zip(&grads) {
        for (o, gi) in grad.iter_mut().zip(g) {
            *o += pi * gi;
        }
    }
    let hess = if want_hess {
        let mut h = vec![vec![0.0; n]; n];
        for ((pi, g), curv) in p.iter().zip(&grads).zip(&curvs) {
            for i in 0..n {
                let f = pi * g[i];
                for j in 0..n {
                    h[i][j] += f * g[j];
                }
            }
            for (p2, gc) in curv {
                for i in 0..n {
                    let f = pi * p2 * gc[i];
                    for j in 0..n {
                        h[i][j] += f * gc[j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                h[i][j] -= grad[i] * grad[j];
            }
        }
        Some(h)
    } else {
        None
    };
    Eval { value, grad, hess }
}

/// Reduction of the program onto the solution set of its equalities:
/// `x = x0 + N·u`.
struct Reduced {
    x0: Vec<f64>,
    basis: Vec<Vec<f64>>, // columns of N, each of length num_vars
    dim: usize,
}

fn reduce_equalities(p: &ConvexProgram) -> Option<Reduced> {
    let n = p.num_vars;
    if p.lin_eq.is_empty() {
        return Some(Reduced {
            x0: vec![0.0; n],
            basis: (0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    v
                })
                .collect(),
            dim: n,
        });
    }
    // Augmented system [E | −constant]; row reduce, read off a particular
    // solution and the null-space basis.
    let mut aug: Vec<Vec<f64>> = p
        .lin_eq
        .iter()
        .map(|e| {
            let mut row = e.dense(n);
            row.push(-e.constant);
            row
        })
        .collect();
    let pivots = linalg::row_reduce(&mut aug, 1e-9);
    // Inconsistent iff a pivot lands in the augmented column.
    if pivots.iter().any(|&c| c == n) {
        return None;
    }
    let mut x0 = vec![0.0; n];
    for (row, &pc) in aug.iter().zip(&pivots) {
        x0[pc] = row[n];
    }
    let rows: Vec<Vec<f64>> = p.lin_eq.iter().map(|e| e.dense(n)).collect();
    let basis = linalg::null_space(&rows, n, 1e-9);
    let dim = basis.len();
    Some(Reduced { x0, basis, dim })
}

fn project_expr(e: &LinExpr, red: &Reduced, n: usize) -> (Vec<f64>, f64) {
    let dense = e.dense(n);
    let b = e.constant + linalg::dot(&dense, &red.x0);
    let coeffs = red.basis.iter().map(|col| linalg::dot(&dense, col)).collect();
    (coeffs, b)
}

/// Solves the convex program to relative/absolute tolerance `tol`.
pub fn solve_convex(p: &ConvexProgram, tol: f64) -> Result<ConvexSolution, ConvexError> {
    for es in &p.exp_sums {
        if es.terms.is_empty() {
            return Err(ConvexError::Numerical("empty exponential-sum constraint".into()));
        }
        if es.terms.iter().any(|t| !(t.weight > 0.0)) {
            return Err(ConvexError::Numerical("nonpositive weight in exponential sum".into()));
        }
    }
    let n = p.num_vars;
    let red = match reduce_equalities(p) {
        Some(r) => r,
        None => {
            return Ok(ConvexSolution {
                status: ConvexStatus::Infeasible,
                point: Vec::new(),
                objective: f64::NAN,
            })
        }
    };
    let (obj_c, obj_b) = project_expr(&p.objective, &red, n);

    // Assemble constraint functions in reduced coordinates.
    let mut funs: Vec<Fun> = Vec::new();
    for e in &p.lin_le {
        let (c, b) = project_expr(e, &red, n);
        funs.push(Fun::Affine(c, b));
    }
    for es in &p.exp_sums {
        let terms = es
            .terms
            .iter()
            .map(|t| {
                let (c, b) = project_expr(&t.exponent, &red, n);
                let mgfs = t
                    .uniform_mgfs
                    .iter()
                    .map(|(lo, hi, g)| {
                        let (gc, gb) = project_expr(g, &red, n);
                        (*lo, *hi, gc, gb)
                    })
                    .collect();
                LseTerm { base: t.weight.ln() + b, coeffs: c, mgfs }
            })
            .collect();
        funs.push(Fun::Lse(terms));
    }

    // Recession-direction test: if some direction d keeps every constraint
    // nonincreasing while the objective decreases without bound, report
    // Unbounded before entering the barrier.
    if ray_unbounded(&obj_c, &funs, red.dim)? {
        return Ok(ConvexSolution {
            status: ConvexStatus::Unbounded,
            point: Vec::new(),
            objective: f64::NAN,
        });
    }

    if funs.is_empty() {
        // Only equalities: linear objective over an affine set.
        let obj = obj_b;
        return Ok(ConvexSolution {
            status: ConvexStatus::Optimal,
            point: red.x0.clone(),
            objective: obj,
        });
    }

    // Box the reduced coordinates so the barrier problem always has a
    // bounded feasible set (and therefore a central path). Genuine
    // unboundedness was ruled out above; optima of well-posed synthesis
    // programs sit far inside this box.
    const BOX: f64 = 1e8;
    for i in 0..red.dim {
        let mut up = vec![0.0; red.dim];
        up[i] = 1.0;
        funs.push(Fun::Affine(up.clone(), -BOX));
        let mut lo = up;
        lo[i] = -1.0;
        funs.push(Fun::Affine(lo, -BOX));
    }

    // Phase 1: find a strictly feasible point.
    let u = match phase1(&funs, red.dim)? {
        Some(u) => u,
        None => {
            return Ok(ConvexSolution {
                status: ConvexStatus::Infeasible,
                point: Vec::new(),
                objective: f64::NAN,
            })
        }
    };

    // Phase 2: barrier stages on the true objective.
    let u = barrier(&obj_c, &funs, u, tol)?;
    let mut x = red.x0.clone();
    for (col, &ui) in red.basis.iter().zip(&u) {
        for (xi, ci) in x.iter_mut().zip(col) {
            *xi += ui * ci;
        }
    }
    let objective = linalg::dot(&obj_c, &u) + obj_b;
    Ok(ConvexSolution { status: ConvexStatus::Optimal, point: x, objective })
}

/// LP ray test: minimize `c·d` over directions `d` with all constraint
/// slopes ≤ 0 (uniform-MGF arguments pinned to 0 along the ray).
fn ray_unbounded(obj: &[f64], funs: &[Fun], dim: usize) -> Result<bool, ConvexError> {
    if obj.iter().all(|&c| c == 0.0) {
        return Ok(false);
    }
    let mut objective = LinExpr::default();
    for (i, &c) in obj.iter().enumerate() {
        objective.add_term(i, c);
    }
    let mut lp = LinearProgram::new(dim, Sense::Min, objective);
    let mut add_row = |coeffs: &[f64], eq: bool| {
        let mut e = LinExpr::default();
        for (i, &c) in coeffs.iter().enumerate() {
            e.add_term(i, c);
        }
        if eq {
            lp.add_eq(e);
        } else {
            lp.add_le(e);
        }
    };
    for f in funs {
        match f {
            Fun::Affine(c, _) => add_row(c, false),
            Fun::Lse(terms) => {
                for t in terms {
                    add_row(&t.coeffs, false);
                    for (_, _, gc, _) in &t.mgfs {
                        add_row(gc, true);
                    }
                }
            }
        }
    }
    let sol = super::simplex::solve_lp(&lp)?;
    Ok(sol.status == LpStatus::Unbounded)
}

fn phase1(funs: &[Fun], dim: usize) -> Result<Option<Vec<f64>>, ConvexError> {
    let u0 = vec![0.0; dim];
    let worst = funs
        .iter()
        .map(|f| f.eval(&u0, false).value)
        .fold(f64::NEG_INFINITY, f64::max);
    if worst < -1e-8 {
        return Ok(Some(u0));
    }
    // Auxiliary program over (u, s): minimize s subject to g_i(u) ≤ s and
    // s ≥ −1; the start (u0, worst + 1) is strictly feasible.
    let mut u = u0;
    u.push(worst + 1.0);
    let sdim = dim;
    let mut obj = vec![0.0; dim + 1];
    obj[sdim] = 1.0;
    let lifted: Vec<LiftedFun> = funs.iter().map(|f| LiftedFun::Shifted(f)).collect();
    let mut all: Vec<LiftedFun> = lifted;
    all.push(LiftedFun::FloorS);

    let strictly_feasible = |v: &[f64]| {
        funs.iter().all(|f| f.eval(&v[..dim], false).value < -1e-8)
    };
    let mut t = 1.0;
    for _ in 0..MAX_STAGES {
        u = match newton_centering_impl(
            &obj,
            u,
            t,
            |v, want_hess| all.iter().map(|f| f.eval(v, dim, want_hess)).collect(),
            Some(&strictly_feasible),
        ) {
            Ok(u) => u,
            // A runaway phase-1 direction that never reaches strict
            // feasibility indicates an infeasible system.
            Err(ConvexError::IterationLimit) => return Ok(None),
            Err(e) => return Err(e),
        };
        if strictly_feasible(&u) {
            return Ok(Some(u[..dim].to_vec()));
        }
        if (all.len() as f64) / t < 1e-10 {
            break;
        }
        t *= BARRIER_FACTOR;
    }
    Ok(None)
}

/// Constraint functions of the phase-1 problem over (u, s).
enum LiftedFun<'a> {
    /// g(u) − s ≤ 0
    Shifted(&'a Fun),
    /// −1 − s ≤ 0
    FloorS,
}

impl LiftedFun<'_> {
    fn eval(&self, v: &[f64], dim: usize, want_hess: bool) -> Eval {
        match self {
            LiftedFun::FloorS => {
                let mut grad = vec![0.0; dim + 1];
                grad[dim] = -1.0;
                Eval { value: -1.0 - v[dim], grad, hess: None }
            }
            LiftedFun::Shifted(f) => {
                let mut e = f.eval(&v[..dim], want_hess);
                e.value -= v[dim];
                e.grad.push(-1.0);
                if let Some(h) = &mut e.hess {
                    for row in h.iter_mut() {
                        row.push(0.0);
                    }
                    h.push(vec![0.0; dim + 1]);
                }
                e
            }
        }
    }
}

fn newton_centering(
    obj: &[f64],
    funs: &[Fun],
    start: Vec<f64>,
    t: f64,
) -> Result<Vec<f64>, ConvexError> {
    newton_centering_impl(
        obj,
        start,
        t,
        |v, want_hess| funs.iter().map(|f| f.eval(v, want_hess)).collect(),
        None,
    )
}

/// Damped Newton on `t·(obj·v) − Σ log(−g_i(v))` from a strictly feasible
/// start. Returns an (approximately) centered point.
fn newton_centering_impl(
    obj: &[f64],
    start: Vec<f64>,
    t: f64,
    eval_all: impl Fn(&[f64], bool) -> Vec<Eval>,
    stop_early: Option<&dyn Fn(&[f64]) -> bool>,
) -> Result<Vec<f64>, ConvexError> {
    let n = start.len();
    let mut v = start;
    let potential = |evs: &[Eval], v: &[f64]| -> f64 {
        let mut p = t * linalg::dot(obj, v);
        for e in evs {
            if e.value >= 0.0 {
                return f64::INFINITY;
            }
            p -= (-e.value).ln();
        }
        p
    };
    for _ in 0..NEWTON_STEP_LIMIT {
        if let Some(stop) = stop_early {
            if stop(&v) {
                return Ok(v);
            }
        }
        let evs = eval_all(&v, true);
        if evs.iter().any(|e| e.value >= 0.0) {
            return Err(ConvexError::Numerical("barrier start left feasible region".into()));
        }
        let mut grad: Vec<f64> = obj.iter().map(|&c| t * c).collect();
        let mut hess = vec![vec![0.0; n]; n];
        for e in &evs {
            let inv = -1.0 / e.value; // 1/(−g) > 0
            for i in 0..n {
                grad[i] += inv * e.grad[i];
                let f = inv * inv * e.grad[i];
                for j in 0..n {
                    hess[i][j] += f * e.grad[j];
                }
            }
            if let Some(h) = &e.hess {
                for i in 0..n {
                    for j in 0..n {
                        hess[i][j] += inv * h[i][j];
                    }
                }
            }
        }
        let neg_grad: Vec<f64> = grad.iter().map(|&g| -g).collect();
        let dir = linalg::solve_spd_ridged(&hess, &neg_grad);
        let decrement = -linalg::dot(&grad, &dir);
        if !decrement.is_finite() {
            return Err(ConvexError::Numerical("non-finite Newton decrement".into()));
        }
        // Scale the stopping test with t: λ²/2 bounds the *potential*
        // suboptimality, so dividing by t keeps the criterion meaningful
        // for the true objective across barrier stages.
        if decrement / 2.0 < 1e-10 * (1.0 + t) {
            return Ok(v);
        }
        // Backtracking line search on the barrier potential.
        let p0 = potential(&evs, &v);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = v.iter().zip(&dir).map(|(vi, di)| vi + alpha * di).collect();
            let cev = eval_all(&cand, false);
            let pc = potential(&cev, &cand);
            if pc <= p0 - 0.25 * alpha * decrement {
                v = cand;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No further progress possible at floating-point resolution.
            return Ok(v);
        }
        if std::env::var("QAVA_CVX_DEBUG").is_ok() {
            eprintln!("t={t:.3e} dec={decrement:.3e} alpha={alpha:.3e} p0={p0:.6e} v={v:?}");
        }
    }
    Err(ConvexError::IterationLimit)
}

fn barrier(obj: &[f64], funs: &[Fun], start: Vec<f64>, tol: f64) -> Result<Vec<f64>, ConvexError> {
    let m = funs.len() as f64;
    let mut t = 1.0;
    let mut u = start;
    for _ in 0..MAX_STAGES {
        u = newton_centering(obj, funs, u, t)?;
        if m / t < tol {
            return Ok(u);
        }
        t *= BARRIER_FACTOR;
    }
    Err(ConvexError::IterationLimit)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min t subject to 2·exp(−t) ≤ 1  →  t = ln 2.
    #[test]
    fn analytic_exp_constraint() {
        let mut p = ConvexProgram::default();
        p.num_vars = 1;
        p.objective = LinExpr::var(0);
        p.exp_sums.push(ExpSumConstraint {
            terms: vec![ExpTerm {
                weight: 2.0,
                exponent: LinExpr::term(0, -1.0),
                uniform_mgfs: vec![],
            }],
        });
        let sol = solve_convex(&p, 1e-9).unwrap();
        assert_eq!(sol.status, ConvexStatus::Optimal);
        assert!((sol.point[0] - 2.0f64.ln()).abs() < 1e-6, "{}", sol.point[0]);
    }

    /// min y subject to ½eˣ + ½e⁻ˣ ≤ e^y: rewritten as
    /// ½e^{x−y} + ½e^{−x−y} ≤ 1, minimized at x = 0, y = 0.
    #[test]
    fn analytic_cosh_case() {
        let mut p = ConvexProgram::default();
        p.num_vars = 2;
        p.objective = LinExpr::var(1);
        let mut e1 = LinExpr::term(0, 1.0);
        e1.add_term(1, -1.0);
        let mut e2 = LinExpr::term(0, -1.0);
        e2.add_term(1, -1.0);
        p.exp_sums.push(ExpSumConstraint {
            terms: vec![
                ExpTerm { weight: 0.5, exponent: e1, uniform_mgfs: vec![] },
                ExpTerm { weight: 0.5, exponent: e2, uniform_mgfs: vec![] },
            ],
        });
        let sol = solve_convex(&p, 1e-9).unwrap();
        assert_eq!(sol.status, ConvexStatus::Optimal);
        assert!(sol.point[0].abs() < 1e-5, "x = {}", sol.point[0]);
        assert!(sol.objective.abs() < 1e-6, "y = {}", sol.objective);
    }

    #[test]
    fn detects_unbounded_direction() {
        // min x with only exp(x) ≤ 1: x free to −∞.
        let mut p = ConvexProgram::default();
        p.num_vars = 1;
        p.objective = LinExpr::var(0);
        p.exp_sums.push(ExpSumConstraint {
            terms: vec![ExpTerm {
                weight: 1.0,
                exponent: LinExpr::var(0),
                uniform_mgfs: vec![],
            }],
        });
        let sol = solve_convex(&p, 1e-8).unwrap();
        assert_eq!(sol.status, ConvexStatus::Unbounded);
    }

    #[test]
    fn infeasible_exp_system() {
        // exp(x) ≤ 1 and x ≥ 1 cannot hold together.
        let mut p = ConvexProgram::default();
        p.num_vars = 1;
        p.objective = LinExpr::var(0);
        p.exp_sums.push(ExpSumConstraint {
            terms: vec![ExpTerm {
                weight: 1.0,
                exponent: LinExpr::var(0),
                uniform_mgfs: vec![],
            }],
        });
        let mut row = LinExpr::term(0, -1.0);
        row.constant = 1.0; // 1 − x ≤ 0
        p.lin_le.push(row);
        let sol = solve_convex(&p, 1e-8).unwrap();
        assert_eq!(sol.status, ConvexStatus::Infeasible);
    }

    #[test]
    fn equality_elimination_works() {
        // min −x s.t. x − y = 2, exp(x) ≤ 1 → x = 0, y = −2.
        let mut p = ConvexProgram::default();
        p.num_vars = 2;
        p.objective = LinExpr::term(0, -1.0);
        let mut eq = LinExpr::var(0);
        eq.add_term(1, -1.0);
        eq.constant = -2.0;
        p.lin_eq.push(eq);
        p.exp_sums.push(ExpSumConstraint {
            terms: vec![ExpTerm {
                weight: 1.0,
                exponent: LinExpr::var(0),
                uniform_mgfs: vec![],
            }],
        });
        let sol = solve_convex(&p, 1e-9).unwrap();
        assert_eq!(sol.status, ConvexStatus::Optimal);
        assert!((sol.point[0]).abs() < 1e-5);
        assert!((sol.point[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn uniform_mgf_matches_series() {
        // log E[e^{gU}] for U(0,1) at small and moderate g against the
        // closed form (e^g − 1)/g.
        for &g in &[1e-10, 1e-6, 0.5, 3.0, -2.0] {
            let (v, _, _) = log_uniform_mgf(0.0, 1.0, g);
            let direct = if g.abs() < 1e-8 {
                (g / 2.0 + g * g / 24.0).ln_1p()
            } else {
                ((g.exp() - 1.0) / g).ln()
            };
            assert!((v - direct).abs() < 1e-9, "g={g}: {v} vs {direct}");
        }
    }
}
