//! Sound and complete upper bounds from exponential templates.
//!
//! The template assigns θ(ℓ,v) = exp(𝐚_ℓ·v + b_ℓ) to every non-terminal
//! location, with θ(ℓ_t) ≡ 0 and θ(ℓ_f) ≡ 1 fixed. θ is a pre fixed-point
//! of the probability transformer — and hence a sound upper bound on the
//! violation probability — iff for every transition with source region
//! Ψ = I(ℓ_src) ∧ guard,
//!
//! ```text
//!   ∀v ⊨ Ψ:  Σ_j p_j · exp(α_j·v + β_j) · E_r[exp(γ_j·r)]  ≤  1
//! ```
//!
//! in the canonical shapes α_j = 𝐚_dst·Q_j − 𝐚_src, β_j = 𝐚_dst·e_j +
//! b_dst − b_src, γ_j = 𝐚_dst·R_j. The universal quantifier over the
//! closed polyhedron Ψ = conv(V*) + cone(R*) is eliminated exactly:
//!
//! * (D1) along every recession ray the exponents must not grow, i.e.
//!   Cv ≤ 0 ⇒ α_j·v ≤ 0 per term — encoded linearly via Farkas' lemma;
//! * (D2) the constraint itself is instantiated at every vertex v* of Ψ.
//!
//! Both directions together are equivalent to the quantified constraint,
//! so the resulting convex program (linear objective 𝐚_init·v_init +
//! b_init, log-sum-exp constraints) computes the least bound the template
//! class can certify.

use crate::polyhedra::{self, decompose, farkas_encode, is_empty, PolyError, Polyhedron};
use crate::pts::{Distribution, Pts};
use crate::solvers::convex::{
    solve_convex, ConvexError, ConvexProgram, ConvexStatus, ExpSumConstraint, ExpTerm,
};
use crate::solvers::{LinExpr, VarPool};
use thiserror::Error;

/// Per-constraint cap on vertices emitted by decomposition.
const MAX_VERTICES: usize = 10_000;

#[derive(Debug, Error)]
pub enum ExpLinError {
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("transition {transition} decomposes into {vertices} vertices (cap {MAX_VERTICES})")]
    VertexExplosion { transition: usize, vertices: usize },
    #[error("certificate check failed: {condition} violated by {violation:.3e} at {witness:?}")]
    CertificateCheckFailed { condition: String, violation: f64, witness: Vec<f64> },
}

/// Unknown exponent coefficients: per non-terminal location a vector 𝐚_ℓ
/// and scalar b_ℓ. The terminal locations carry no unknowns — θ(ℓ_t) ≡ 0
/// never appears in a canonical term and θ(ℓ_f) ≡ 1 = exp(0·v + 0).
#[derive(Clone, Debug)]
pub struct ExpTemplate {
    unknowns: Vec<Option<(Vec<usize>, usize)>>,
}

impl ExpTemplate {
    pub fn new(pts: &Pts, pool: &mut VarPool) -> Self {
        let n = pts.var_names.len();
        let unknowns = (0..pts.loc_names.len())
            .map(|l| {
                if l == pts.term_loc || l == pts.fail_loc {
                    return None;
                }
                let a = (0..n).map(|k| pool.fresh(format!("a[{l}][{k}]"))).collect();
                Some((a, pool.fresh(format!("b[{l}]"))))
            })
            .collect();
        ExpTemplate { unknowns }
    }

    /// k-th exponent coefficient at `loc` as an expression over unknowns.
    pub fn a(&self, loc: usize, k: usize) -> LinExpr {
        match &self.unknowns[loc] {
            Some((a, _)) => LinExpr::var(a[k]),
            None => LinExpr::default(),
        }
    }

    /// Exponent offset at `loc` as an expression over unknowns.
    pub fn b(&self, loc: usize) -> LinExpr {
        match &self.unknowns[loc] {
            Some((_, b)) => LinExpr::var(*b),
            None => LinExpr::default(),
        }
    }
}

/// Direction of the canonical inequality Σ_j p_j·exp(…) ⋈ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Pre fixed-point (upper synthesis): Σ ≤ 1.
    Le,
    /// Post fixed-point (lower synthesis): Σ ≥ 1.
    Ge,
}

/// One fork's contribution p·exp(α·v + β)·E[exp(γ·r)]; α, β, γ are affine
/// in the template unknowns.
#[derive(Clone, Debug)]
pub struct CanonicalTerm {
    pub prob: f64,
    pub alpha: Vec<LinExpr>,
    pub beta: LinExpr,
    pub gamma: Vec<LinExpr>,
}

/// Canonical form of one transition's fixed-point condition over Ψ.
#[derive(Clone, Debug)]
pub struct CanonicalConstraint {
    pub psi: Polyhedron,
    pub terms: Vec<CanonicalTerm>,
    pub direction: Direction,
    /// Index of the originating transition (for diagnostics).
    pub transition: usize,
}

/// Puts every transition's fixed-point condition into canonical form.
/// Constraints with empty Ψ are dropped; forks into ℓ_t contribute no term
/// (θ(ℓ_t) ≡ 0), so a transition entirely into ℓ_t yields a term-free
/// constraint (trivially true for `Le`, unsatisfiable for `Ge`).
pub fn canonicalize(
    pts: &Pts,
    tmpl: &ExpTemplate,
    direction: Direction,
) -> Result<Vec<CanonicalConstraint>, PolyError> {
    let n = pts.var_names.len();
    let m = pts.rvar_names.len();
    let mut out = Vec::new();
    for (ti, tr) in pts.transitions.iter().enumerate() {
        let psi = pts.invariants[tr.src].intersect(&tr.guard);
        if is_empty(&psi)? {
            continue;
        }
        let mut terms = Vec::new();
        for fork in &tr.forks {
            if fork.dst == pts.term_loc {
                continue;
            }
            // ℓ_f destinations reduce to α = −𝐚_src, β = −b_src, γ = 0
            // because the template reads as 𝐚 = 0, b = 0 there.
            let u = &fork.update;
            let alpha = (0..n)
                .map(|k| {
                    let mut e = LinExpr::default();
                    for i in 0..n {
                        e.add_scaled(&tmpl.a(fork.dst, i), u.q[i][k]);
                    }
                    e.add_scaled(&tmpl.a(tr.src, k), -1.0);
                    e
                })
                .collect();
            let mut beta = tmpl.b(fork.dst).minus(&tmpl.b(tr.src));
            for i in 0..n {
                beta.add_scaled(&tmpl.a(fork.dst, i), u.e[i]);
            }
            let gamma = (0..m)
                .map(|j| {
                    let mut e = LinExpr::default();
                    for i in 0..n {
                        e.add_scaled(&tmpl.a(fork.dst, i), u.r[i][j]);
                    }
                    e
                })
                .collect();
            terms.push(CanonicalTerm { prob: fork.prob, alpha, beta, gamma });
        }
        out.push(CanonicalConstraint { psi, terms, direction, transition: ti });
    }
    Ok(out)
}

/// Quantifier-free constraints equivalent to one canonical constraint.
#[derive(Clone, Debug, Default)]
pub struct Eliminated {
    /// Affine constraints `expr ≤ 0` (D1 Farkas rows, multiplier signs).
    pub lin_le: Vec<LinExpr>,
    /// Affine constraints `expr = 0` (D1 Farkas equalities).
    pub lin_eq: Vec<LinExpr>,
    /// One log-sum-exp constraint per vertex of Ψ (D2).
    pub exp_sums: Vec<ExpSumConstraint>,
}

/// Expands E[exp(γ·r)] into the convex-program vocabulary: every Discrete
/// sampling variable splits the term into one copy per atom (exact), every
/// Uniform one attaches its closed-form MGF factor.
fn mgf_expand(
    weight: f64,
    exponent: LinExpr,
    gamma: &[LinExpr],
    dists: &[Distribution],
) -> Vec<ExpTerm> {
    let mut terms = vec![ExpTerm { weight, exponent, uniform_mgfs: Vec::new() }];
    for (j, g) in gamma.iter().enumerate() {
        if g.terms.is_empty() && g.constant == 0.0 {
            continue;
        }
        match &dists[j] {
            Distribution::Uniform(lo, hi) => {
                for t in &mut terms {
                    t.uniform_mgfs.push((*lo, *hi, g.clone()));
                }
            }
            Distribution::Discrete(atoms) => {
                let mut next = Vec::with_capacity(terms.len() * atoms.len());
                for t in &terms {
                    for &(v, p) in atoms {
                        if p == 0.0 {
                            continue;
                        }
                        let mut e = t.exponent.clone();
                        e.add_scaled(g, v);
                        next.push(ExpTerm {
                            weight: t.weight * p,
                            exponent: e,
                            uniform_mgfs: t.uniform_mgfs.clone(),
                        });
                    }
                }
                terms = next;
            }
        }
    }
    terms
}

/// Eliminates the state quantifier from an upper-direction constraint:
/// (D1) per term, ∀v: Cv ≤ 0 ⇒ α_j·v ≤ 0 over the recession cone of Ψ,
/// Farkas-encoded; (D2) the exponential sum instantiated at every vertex.
pub fn eliminate(
    con: &CanonicalConstraint,
    dists: &[Distribution],
    pool: &mut VarPool,
) -> Result<Eliminated, ExpLinError> {
    debug_assert_eq!(con.direction, Direction::Le);
    let mut out = Eliminated::default();
    if con.terms.is_empty() {
        return Ok(out); // 0 ≤ 1: trivially true.
    }
    let gen = decompose(&con.psi)?;
    if gen.vertices.len() > MAX_VERTICES {
        return Err(ExpLinError::VertexExplosion {
            transition: con.transition,
            vertices: gen.vertices.len(),
        });
    }
    if !gen.rays.is_empty() {
        // Ψ is bounded otherwise, which makes D1 vacuous (cone = {0}).
        let cone = con.psi.recession_cone();
        for term in &con.terms {
            let enc = farkas_encode(&cone, &term.alpha, &LinExpr::default(), pool);
            out.lin_eq.extend(enc.eqs);
            // Over a cone the rhs inequality is identically 0 ≤ 0; keeping
            // it would deny the barrier method a strict interior.
            if !(enc.ineq.terms.is_empty() && enc.ineq.constant <= 0.0) {
                out.lin_le.push(enc.ineq);
            }
            out.lin_le.extend(enc.multipliers.iter().map(|&y| LinExpr::term(y, -1.0)));
        }
    }
    for v in &gen.vertices {
        let mut es = ExpSumConstraint { terms: Vec::new() };
        for term in &con.terms {
            let mut exponent = term.beta.clone();
            for (a, &x) in term.alpha.iter().zip(v) {
                exponent.add_scaled(a, x);
            }
            es.terms.extend(mgf_expand(term.prob, exponent, &term.gamma, dists));
        }
        out.exp_sums.push(es);
    }
    Ok(out)
}

/// A concrete exponential certificate: exponents (𝐚_ℓ, b_ℓ) per location.
/// θ(ℓ_f) ≡ 1 is stored as (0, 0); the ℓ_t entry is never consulted.
#[derive(Clone, Debug)]
pub struct ExpCert {
    pub exponents: Vec<(Vec<f64>, f64)>,
}

impl ExpCert {
    /// log θ(ℓ, v) = 𝐚_ℓ·v + b_ℓ (not meaningful at ℓ_t).
    pub fn log_theta(&self, loc: usize, v: &[f64]) -> f64 {
        let (a, b) = &self.exponents[loc];
        a.iter().zip(v).map(|(c, x)| c * x).sum::<f64>() + b
    }
}

#[derive(Clone, Debug)]
pub enum ExpLinOutcome {
    /// The program is unbounded below: the failure location is
    /// unreachable and the violation probability is 0.
    Zero,
    /// No exponential template over affine exponents is a pre fixed-point;
    /// completeness of the elimination licenses this verdict.
    NoTemplateExists,
    /// ln of the synthesized bound with its certificate.
    Bound { log_bound: f64, cert: ExpCert },
}

impl ExpLinOutcome {
    /// ln of the reported probability bound (−∞ for `Zero`, 0 when no
    /// template exists — the trivial bound 1 still holds).
    pub fn log_bound(&self) -> f64 {
        match self {
            ExpLinOutcome::Zero => f64::NEG_INFINITY,
            ExpLinOutcome::NoTemplateExists => 0.0,
            ExpLinOutcome::Bound { log_bound, .. } => *log_bound,
        }
    }
}

/// Synthesizes the least upper bound exp(𝐚_init·v_init + b_init) the
/// exponential template class can certify, by convex optimization over
/// the eliminated constraints. The returned certificate has been
/// re-verified by residual checks against the exact MGFs.
pub fn synth_upper(pts: &Pts, tol: f64) -> Result<ExpLinOutcome, ExpLinError> {
    let mut pool = VarPool::new();
    let tmpl = ExpTemplate::new(pts, &mut pool);
    let cons = canonicalize(pts, &tmpl, Direction::Le)?;
    let mut prog = ConvexProgram::default();
    for (k, &x) in pts.init_val.iter().enumerate() {
        prog.objective.add_scaled(&tmpl.a(pts.init_loc, k), x);
    }
    prog.objective.add(&tmpl.b(pts.init_loc));
    for con in &cons {
        let el = eliminate(con, &pts.dists, &mut pool)?;
        prog.lin_le.extend(el.lin_le);
        prog.lin_eq.extend(el.lin_eq);
        prog.exp_sums.extend(el.exp_sums);
    }
    prog.num_vars = pool.len();
    let sol = solve_convex(&prog, tol)?;
    match sol.status {
        ConvexStatus::Infeasible => Ok(ExpLinOutcome::NoTemplateExists),
        ConvexStatus::Unbounded => Ok(ExpLinOutcome::Zero),
        ConvexStatus::Optimal => {
            let n = pts.var_names.len();
            let cert = ExpCert {
                exponents: (0..pts.loc_names.len())
                    .map(|l| match &tmpl.unknowns[l] {
                        Some((a, b)) => {
                            (a.iter().map(|&i| sol.point[i]).collect(), sol.point[*b])
                        }
                        None => (vec![0.0; n], 0.0),
                    })
                    .collect(),
            };
            verify_cert(pts, &cert)?;
            Ok(ExpLinOutcome::Bound { log_bound: sol.objective, cert })
        }
    }
}

/// Residual check of a concrete certificate against the exact MGFs: the
/// exponential sum must stay ≤ 1 (+ slack) at every vertex of every Ψ and
/// must not grow along any recession ray.
pub fn verify_cert(pts: &Pts, cert: &ExpCert) -> Result<(), ExpLinError> {
    let scale = cert
        .exponents
        .iter()
        .flat_map(|(a, b)| a.iter().chain(std::iter::once(b)))
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let ray_tol = 1e-7 * (1.0 + scale);
    for tr in pts.transitions.iter() {
        let psi = pts.invariants[tr.src].intersect(&tr.guard);
        if is_empty(&psi)? {
            continue;
        }
        let numeric = numeric_terms(pts, cert, tr.src, &tr.forks);
        if numeric.is_empty() {
            continue;
        }
        let gen = decompose(&psi)?;
        for d in &gen.rays {
            for (_, alpha, _, _) in &numeric {
                let slope: f64 = alpha.iter().zip(d).map(|(a, x)| a * x).sum();
                if slope > ray_tol {
                    return Err(ExpLinError::CertificateCheckFailed {
                        condition: "D1".into(),
                        violation: slope,
                        witness: d.clone(),
                    });
                }
            }
        }
        for v in &gen.vertices {
            let s = eval_exp_sum(pts, &numeric, v);
            if s > 1.0 + 1e-6 {
                return Err(ExpLinError::CertificateCheckFailed {
                    condition: "D2".into(),
                    violation: s - 1.0,
                    witness: v.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Concrete (p, α, β, γ) tuples of a transition's canonical terms.
pub(crate) fn numeric_terms(
    pts: &Pts,
    cert: &ExpCert,
    src: usize,
    forks: &[crate::pts::Fork],
) -> Vec<(f64, Vec<f64>, f64, Vec<f64>)> {
    let n = pts.var_names.len();
    let m = pts.rvar_names.len();
    let (a_src, b_src) = cert.exponents[src].clone();
    let mut out = Vec::new();
    for fork in forks {
        if fork.dst == pts.term_loc {
            continue;
        }
        let (a_dst, b_dst) = &cert.exponents[fork.dst];
        let u = &fork.update;
        let alpha: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|i| a_dst[i] * u.q[i][k]).sum::<f64>() - a_src[k])
            .collect();
        let beta =
            (0..n).map(|i| a_dst[i] * u.e[i]).sum::<f64>() + b_dst - b_src;
        let gamma: Vec<f64> =
            (0..m).map(|j| (0..n).map(|i| a_dst[i] * u.r[i][j]).sum()).collect();
        out.push((fork.prob, alpha, beta, gamma));
    }
    out
}

/// Σ_j p_j·exp(α_j·v + β_j)·Π_m mgf_m(γ_{j,m}) with exact MGFs.
pub(crate) fn eval_exp_sum(
    pts: &Pts,
    terms: &[(f64, Vec<f64>, f64, Vec<f64>)],
    v: &[f64],
) -> f64 {
    terms
        .iter()
        .map(|(p, alpha, beta, gamma)| {
            let mut e = alpha.iter().zip(v).map(|(a, x)| a * x).sum::<f64>() + beta;
            for (j, &g) in gamma.iter().enumerate() {
                e += pts.dists[j].log_mgf(g);
            }
            p * e.exp()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::pts::{Fork, Transition, UpdateFn};

    fn straight_to(dst_is_fail: bool) -> Pts {
        let dst = if dst_is_fail { 2 } else { 1 };
        Pts {
            var_names: vec!["x".into()],
            rvar_names: vec![],
            dists: vec![],
            loc_names: vec!["l0".into(), "lt".into(), "lf".into()],
            init_loc: 0,
            term_loc: 1,
            fail_loc: 2,
            init_val: vec![0.0],
            transitions: vec![Transition {
                src: 0,
                guard: Polyhedron::universe(1),
                forks: vec![Fork { prob: 1.0, dst, update: UpdateFn::identity(1, 0) }],
            }],
            invariants: vec![
                Polyhedron::universe(1),
                Polyhedron::universe(1),
                Polyhedron::universe(1),
            ],
        }
    }

    #[test]
    fn straight_to_termination_is_zero() {
        let out = synth_upper(&straight_to(false), 1e-9).unwrap();
        assert!(matches!(out, ExpLinOutcome::Zero));
    }

    #[test]
    fn straight_to_failure_is_one() {
        let out = synth_upper(&straight_to(true), 1e-9).unwrap();
        let lb = out.log_bound();
        assert!(lb.abs() < 1e-6, "log bound {lb} should be ~0 (bound 1)");
    }

    #[test]
    fn race_canonical_form_matches_expected_shape() {
        let (pts, _, _) = corpus::instance("race", "40,0").unwrap().build().unwrap();
        let mut pool = VarPool::new();
        let tmpl = ExpTemplate::new(&pts, &mut pool);
        let cons = canonicalize(&pts, &tmpl, Direction::Le).unwrap();
        // The probabilistic dispatch: two forks of weight 1/2 back to the
        // loop head, updates (x+1, y+2) and (x+1, y).
        let con = cons.iter().find(|c| c.terms.len() == 2).unwrap();
        assert!(con.terms.iter().all(|t| (t.prob - 0.5).abs() < 1e-12));
        // Shared α = 𝐚_head − 𝐚_switch (identity Q in both forks).
        assert_eq!(con.terms[0].alpha, con.terms[1].alpha);
        // β₁ − β₂ = 𝐚_head·([1,2] − [1,0]) = 2·a_head[1].
        let head = pts.init_loc;
        let diff = con.terms[0].beta.minus(&con.terms[1].beta);
        let expect = tmpl.a(head, 1).scaled(2.0);
        let neg = tmpl.a(head, 1).scaled(-2.0);
        assert!(diff == expect || diff == neg, "β difference should be ±2·a_head[y]");
        // γ = 0: no sampling variables in race.
        assert!(con.terms.iter().all(|t| t.gamma.is_empty()));
    }

    #[test]
    fn single_term_zero_alpha_reduces_to_beta_cap() {
        // p·exp(β) ≤ 1 ⟺ β ≤ −ln p, checked through eliminate on a fixed
        // bounded Ψ (unit box ⇒ empty D1, four D2 vertices).
        let mut pool = VarPool::new();
        let b = pool.fresh("b");
        let psi = Polyhedron {
            dim: 2,
            rows: vec![
                (vec![1.0, 0.0], 1.0),
                (vec![-1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 1.0),
                (vec![0.0, -1.0], 0.0),
            ],
        };
        let con = CanonicalConstraint {
            psi,
            terms: vec![CanonicalTerm {
                prob: 0.25,
                alpha: vec![LinExpr::default(), LinExpr::default()],
                beta: LinExpr::var(b),
                gamma: vec![],
            }],
            direction: Direction::Le,
            transition: 0,
        };
        let el = eliminate(&con, &[], &mut pool).unwrap();
        assert!(el.lin_eq.iter().all(|e| e.terms.is_empty() && e.constant == 0.0));
        assert_eq!(el.exp_sums.len(), 4);
        // Each vertex constraint is 0.25·exp(b) ≤ 1, i.e. b ≤ ln 4.
        for es in &el.exp_sums {
            assert_eq!(es.terms.len(), 1);
            let t = &es.terms[0];
            assert!((t.weight - 0.25).abs() < 1e-12);
            assert_eq!(t.exponent, LinExpr::var(b));
        }
    }

    #[test]
    fn race_bound_matches_reported_value() {
        let (pts, _, _) = corpus::instance("race", "40,0").unwrap().build().unwrap();
        let out = synth_upper(&pts, 1e-9).unwrap();
        let lb = out.log_bound();
        assert!(
            (lb - (-15.697)).abs() < 0.05,
            "race (40,0) log bound {lb}, expected ≈ −15.697"
        );
        let ExpLinOutcome::Bound { cert, .. } = out else { panic!("expected bound") };
        // a₂ multiplies y_init = 0 and is not pinned down by optimality;
        // a₁ and c are.
        let (a, c) = &cert.exponents[pts.init_loc];
        assert!((a[0] - (-1.19)).abs() < 0.05, "a₁ = {}", a[0]);
        assert!((c - 31.79).abs() < 0.5, "c = {c}");
    }

    #[test]
    fn rdwalk_concentration_matches_reported_value() {
        let (pts, _, _) = corpus::instance("rdwalk", "500").unwrap().build().unwrap();
        let out = synth_upper(&pts, 1e-9).unwrap();
        let expect = (1.569e-12f64).ln();
        // Reported for the (x,t)=(0,0) instance of the same walk.
        let lb = out.log_bound();
        assert!(lb < (1e-11f64).ln(), "rdwalk 500 log bound {lb} vs {expect}");
    }

    #[test]
    fn onedwalk_bound_matches_reported_value() {
        let (pts, _, _) = corpus::instance("1dwalk", "10").unwrap().build().unwrap();
        let out = synth_upper(&pts, 1e-9).unwrap();
        let lb = out.log_bound();
        let expect = (7.82f64).ln() - 208.0 * (10.0f64).ln();
        assert!((lb - expect).abs() < 2.0, "1dwalk x=10 log bound {lb}, expected ≈ {expect}");
    }

    #[test]
    fn dominates_hoeffding_on_race() {
        let (pts, _, _) = corpus::instance("race", "40,0").unwrap().build().unwrap();
        let upper = synth_upper(&pts, 1e-9).unwrap().log_bound();
        let hoeff = crate::hoeffding::hoeffding_synthesize(&pts, None).unwrap().log_bound();
        assert!(upper <= hoeff + 1e-6, "{upper} vs hoeffding {hoeff}");
    }
}
