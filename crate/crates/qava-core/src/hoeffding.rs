//! Exponential upper bounds from repulsing ranking supermartingales.
//!
//! A (β,Δ,ε)-RepRSM is an affine map η(ℓ,v) = a_ℓ·v + b_ℓ with
//!   C1: η(ℓ_init, v_init) ≤ 0,
//!   C2: v ⊨ I(ℓ_f) ⇒ η(ℓ_f, v) ≥ 0,
//!   C3: expected η decreases by at least ε along every transition,
//!   C4: one-step changes of η lie in [β, β+Δ].
//! Whenever η is a RepRSM, exp((8ε/Δ²)·η) is a pre fixed-point of the
//! probability transformer, so exp((8ε/Δ²)·η(ℓ_init, v_init)) bounds the
//! violation probability from above. Scaling lets us normalize Δ = 1.
//!
//! Each quantified condition is turned into linear constraints on the
//! template coefficients via Farkas' lemma; the remaining bilinear
//! objective 8·ε·ω (with 0 ≥ ω ≥ η(ℓ_init, v_init)) is unimodal in ε, so
//! `Ser` fixes ε per LP solve and ternary-searches for the optimum.

use crate::polyhedra::{self, farkas_encode, FarkasEncoding, Polyhedron};
use crate::pts::{Distribution, Pts, Transition};
use crate::solvers::{
    solve_lp, LinExpr, LinearProgram, LpError, LpStatus, Sense, VarPool,
};
use thiserror::Error;

/// Coefficient box for the per-ε solves; any RepRSM rescales into it.
const COEFF_BOX: f64 = 1e4;
/// State box used when auditing certificates over unbounded invariants.
const RECHECK_BOX: f64 = 1e6;

#[derive(Debug, Error)]
pub enum HoeffdingError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Poly(#[from] polyhedra::PolyError),
    #[error("certificate check failed: {condition} violated by {violation:.3e} at {witness:?}")]
    CertificateCheckFailed { condition: String, violation: f64, witness: Vec<f64> },
}

/// A synthesized (β, 1, ε)-RepRSM.
#[derive(Clone, Debug)]
pub struct RepRsm {
    /// `(a_ℓ, b_ℓ)` per location: η(ℓ, v) = a_ℓ·v + b_ℓ.
    pub eta: Vec<(Vec<f64>, f64)>,
    pub beta: f64,
    pub epsilon: f64,
}

impl RepRsm {
    pub fn eval(&self, loc: usize, v: &[f64]) -> f64 {
        let (a, b) = &self.eta[loc];
        a.iter().zip(v).map(|(c, x)| c * x).sum::<f64>() + b
    }
}

#[derive(Clone, Debug)]
pub enum HoeffdingOutcome {
    /// The failure location is unreachable (ε unbounded): bound 0.
    Zero,
    /// No RepRSM with ε > 0 and η(init) < 0 exists: trivial bound 1.
    One,
    /// ln of the violation bound, 8·ε·η(ℓ_init, v_init), with certificate.
    Bound { log_bound: f64, cert: RepRsm },
}

impl HoeffdingOutcome {
    /// ln of the reported probability bound (−∞ for `Zero`, 0 for `One`).
    pub fn log_bound(&self) -> f64 {
        match self {
            HoeffdingOutcome::Zero => f64::NEG_INFINITY,
            HoeffdingOutcome::One => 0.0,
            HoeffdingOutcome::Bound { log_bound, .. } => *log_bound,
        }
    }
}

/// Template variable indices inside the LP.
struct Template {
    a: Vec<Vec<usize>>,
    b: Vec<usize>,
    beta: usize,
    omega: usize,
    eps: usize,
}

/// All joint extreme points of the sampling space: per-variable atoms for
/// discrete distributions and interval endpoints for uniform ones (η is
/// affine in r, so endpoint instantiation of C4 is exact).
fn support_extremes(pts: &Pts) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for d in &pts.dists {
        let values: Vec<f64> = match d {
            Distribution::Discrete(atoms) => atoms.iter().map(|&(v, _)| v).collect(),
            Distribution::Uniform(lo, hi) => vec![*lo, *hi],
        };
        points = points
            .iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// `a_dst·(R·r̂ + e) + b_dst − b_src` as a template expression.
fn eta_shift(t: &Template, fork: &crate::pts::Fork, src: usize, rhat: &[f64]) -> LinExpr {
    let upd = &fork.update;
    let mut e = LinExpr::term(t.b[fork.dst], 1.0);
    e.add_term(t.b[src], -1.0);
    for i in 0..upd.e.len() {
        let mut shift = upd.e[i];
        for (j, &r) in rhat.iter().enumerate() {
            shift += upd.r[i][j] * r;
        }
        e.add_term(t.a[fork.dst][i], shift);
    }
    e
}

/// `a_dst·Q − a_src` per space dimension, scaled by `w`.
fn add_drift_coeffs(c: &mut [LinExpr], t: &Template, fork: &crate::pts::Fork, src: usize, w: f64) {
    let upd = &fork.update;
    for (k, ck) in c.iter_mut().enumerate() {
        for i in 0..upd.q.len() {
            if upd.q[i][k] != 0.0 {
                ck.add_term(t.a[fork.dst][i], w * upd.q[i][k]);
            }
        }
        ck.add_term(t.a[src][k], -w);
    }
}

struct ReprsmLp {
    lp: LinearProgram,
    template: Template,
}

/// Builds the LP over template coefficients, β, ω, and ε whose feasible
/// points (with ε fixed) are exactly the (β,1,ε)-RepRSMs with
/// η(ℓ_init, v_init) ≤ ω ≤ 0. Constraints over empty guard regions are
/// vacuous and skipped. When `boxed`, coefficients are confined to
/// [−10⁶, 10⁶] for numerical stability.
fn build_reprsm_lp(pts: &Pts, boxed: bool) -> Result<ReprsmLp, HoeffdingError> {
    let n = pts.var_names.len();
    let nloc = pts.loc_names.len();
    let mut pool = VarPool::new();
    let template = Template {
        a: (0..nloc)
            .map(|l| (0..n).map(|k| pool.fresh(format!("a{l}_{k}"))).collect())
            .collect(),
        b: (0..nloc).map(|l| pool.fresh(format!("b{l}"))).collect(),
        beta: pool.fresh("beta"),
        omega: pool.fresh("omega"),
        eps: pool.fresh("eps"),
    };
    let t = &template;
    let mut encodings: Vec<FarkasEncoding> = Vec::new();
    let mut direct: Vec<LinExpr> = Vec::new();

    // C1: η(ℓ_init, v_init) ≤ ω (ω ≤ 0 is a variable bound below).
    let mut c1 = LinExpr::term(t.b[pts.init_loc], 1.0);
    for (k, &x) in pts.init_val.iter().enumerate() {
        c1.add_term(t.a[pts.init_loc][k], x);
    }
    c1.add_term(t.omega, -1.0);
    direct.push(c1);

    // C2: I(ℓ_f) entails η(ℓ_f, v) ≥ 0, i.e. (−a_f)·v ≤ b_f.
    let fail_inv = &pts.invariants[pts.fail_loc];
    if !polyhedra::is_empty(fail_inv)? {
        let c: Vec<LinExpr> =
            (0..n).map(|k| LinExpr::term(t.a[pts.fail_loc][k], -1.0)).collect();
        let d = LinExpr::term(t.b[pts.fail_loc], 1.0);
        encodings.push(farkas_encode(fail_inv, &c, &d, &mut pool));
    }

    let extremes = support_extremes(pts);
    let means: Vec<f64> = pts.dists.iter().map(|d| d.mean()).collect();
    for tr in &pts.transitions {
        let region = pts.invariants[tr.src].intersect(&tr.guard);
        if polyhedra::is_empty(&region)? {
            continue;
        }
        // C3: Σ_j p_j·E[η(dst_j, upd_j(v,r))] ≤ η(src, v) − ε, encoded as
        // (Σ_j p_j·a_dstj·Q_j − a_src)·v ≤ b_src − ε − Σ_j p_j·(a_dstj·(R_j·E[r]+e_j) + b_dstj).
        let mut c: Vec<LinExpr> = vec![LinExpr::constant(0.0); n];
        let mut d = LinExpr::term(t.b[tr.src], 1.0);
        d.add_term(t.eps, -1.0);
        for fork in &tr.forks {
            add_drift_coeffs(&mut c, t, fork, tr.src, fork.prob);
            d.add_scaled(&eta_shift(t, fork, tr.src, &means), -fork.prob);
            d.add_term(t.b[tr.src], -fork.prob); // eta_shift includes −b_src
        }
        encodings.push(farkas_encode(&region, &c, &d, &mut pool));

        // C4 per fork and sampling extreme r̂ (Δ = 1):
        //   β ≤ η(dst, upd(v, r̂)) − η(src, v) ≤ β + 1.
        for fork in &tr.forks {
            for rhat in &extremes {
                let mut c: Vec<LinExpr> = vec![LinExpr::constant(0.0); n];
                add_drift_coeffs(&mut c, t, fork, tr.src, 1.0);
                let shift = eta_shift(t, fork, tr.src, rhat);
                // Upper: (a_dst·Q − a_src)·v ≤ β + 1 − shift.
                let mut d = LinExpr::term(t.beta, 1.0);
                d.add(&LinExpr::constant(1.0));
                d.add_scaled(&shift, -1.0);
                encodings.push(farkas_encode(&region, &c, &d, &mut pool));
                // Lower: (a_src − a_dst·Q)·v ≤ shift − β.
                let neg: Vec<LinExpr> = c.iter().map(|e| e.scaled(-1.0)).collect();
                let mut d = shift.clone();
                d.add_term(t.beta, -1.0);
                encodings.push(farkas_encode(&region, &neg, &d, &mut pool));
            }
        }
    }

    let mut lp = LinearProgram::new(pool.len(), Sense::Min, LinExpr::constant(0.0));
    for e in direct {
        lp.add_le(e);
    }
    for enc in &encodings {
        enc.install(&mut lp);
    }
    if boxed {
        for l in 0..nloc {
            for k in 0..n {
                lp.set_bounds(t.a[l][k], -COEFF_BOX, COEFF_BOX);
            }
            lp.set_bounds(t.b[l], -COEFF_BOX, COEFF_BOX);
        }
        lp.set_bounds(t.beta, -COEFF_BOX, COEFF_BOX);
    }
    lp.set_bounds(t.omega, f64::NEG_INFINITY, 0.0);
    lp.set_bounds(t.eps, 0.0, f64::INFINITY);
    Ok(ReprsmLp { lp, template })
}

/// Minimizes ω at fixed ε; `None` when infeasible.
fn omega_opt(base: &ReprsmLp, eps: f64) -> Result<Option<LpSolutionView>, HoeffdingError> {
    let mut lp = base.lp.clone();
    lp.sense = Sense::Min;
    lp.objective = LinExpr::term(base.template.omega, 1.0);
    lp.set_bounds(base.template.eps, eps, eps);
    let sol = solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(LpSolutionView { omega: sol.objective, point: sol.point }),
        _ => None,
    })
}

struct LpSolutionView {
    omega: f64,
    point: Vec<f64>,
}

fn extract_cert(pts: &Pts, t: &Template, point: &[f64], eps: f64) -> RepRsm {
    let n = pts.var_names.len();
    RepRsm {
        eta: (0..pts.loc_names.len())
            .map(|l| ((0..n).map(|k| point[t.a[l][k]]).collect(), point[t.b[l]]))
            .collect(),
        beta: point[t.beta],
        epsilon: eps,
    }
}

/// The `Ser` bilinear search: feasibility screening, then ternary search
/// for ε* minimizing f(ε) = 8·ε·ω_opt(ε) on [0, ε_max], stopping once the
/// bracket is narrower than `mu` (default 10⁻⁶·max(ε_max, 1)).
pub fn hoeffding_synthesize(
    pts: &Pts,
    mu: Option<f64>,
) -> Result<HoeffdingOutcome, HoeffdingError> {
    // Step 1a: ε_max by LP (unboxed); unbounded ⇒ ℓ_f unreachable ⇒ bound 0.
    let free = build_reprsm_lp(pts, false)?;
    let mut lp = free.lp.clone();
    lp.sense = Sense::Max;
    lp.objective = LinExpr::term(free.template.eps, 1.0);
    let sol = solve_lp(&lp)?;
    let eps_max = match sol.status {
        LpStatus::Unbounded => return Ok(HoeffdingOutcome::Zero),
        LpStatus::Infeasible => return Ok(HoeffdingOutcome::One),
        LpStatus::Optimal => sol.objective,
    };
    // Step 1b: a useful bound needs some ε > 0 with ω < 0, which holds iff
    // ε_max > 0 and ω_opt(0) < 0 (ω_opt is monotone in ε).
    let boxed = build_reprsm_lp(pts, true)?;
    let at_zero = omega_opt(&boxed, 0.0)?;
    let usable = eps_max > 1e-12
        && at_zero.as_ref().map(|s| s.omega < -1e-12).unwrap_or(false);
    if !usable {
        return Ok(HoeffdingOutcome::One);
    }

    // Step 2: ternary search on the unimodal f(ε) = 8·ε·ω_opt(ε).
    let mu = mu.unwrap_or(1e-6 * eps_max.max(1.0));
    let f = |eps: f64| -> Result<f64, HoeffdingError> {
        Ok(omega_opt(&boxed, eps)?.map(|s| 8.0 * eps * s.omega).unwrap_or(f64::INFINITY))
    };
    let (mut l, mut r) = (0.0f64, eps_max);
    while r - l >= mu {
        let m1 = (2.0 * l + r) / 3.0;
        let m2 = (l + 2.0 * r) / 3.0;
        if f(m1)? < f(m2)? {
            r = m2;
        } else {
            l = m1;
        }
    }
    let eps = l;
    let best = omega_opt(&boxed, eps)?.unwrap_or_else(|| {
        // l = 0 is feasible whenever step 1b succeeded.
        unreachable!("ω_opt infeasible inside the certified bracket")
    });
    let cert = extract_cert(pts, &boxed.template, &best.point, eps);
    let log_bound = hoeffding_bound(pts, &cert)?;
    Ok(HoeffdingOutcome::Bound { log_bound, cert })
}

/// Re-checks C1–C4 by maximizing each violated quantity over its guard
/// region with the certificate fixed, then returns the log-bound
/// 8·ε·η(ℓ_init, v_init) (Δ = 1).
pub fn hoeffding_bound(pts: &Pts, cert: &RepRsm) -> Result<f64, HoeffdingError> {
    let tol = 1e-6 * (1.0 + cert.eta.iter().map(|(a, b)| {
        a.iter().fold(b.abs(), |m, c| m.max(c.abs()))
    }).fold(0.0f64, f64::max));
    let eta_init = cert.eval(pts.init_loc, &pts.init_val);
    if eta_init > tol {
        return Err(HoeffdingError::CertificateCheckFailed {
            condition: "C1".into(),
            violation: eta_init,
            witness: pts.init_val.clone(),
        });
    }
    // C2: max over I(ℓ_f) of −η(ℓ_f, v) must be ≤ 0.
    let (af, bf) = &cert.eta[pts.fail_loc];
    let neg: Vec<f64> = af.iter().map(|c| -c).collect();
    check_entailment(&pts.invariants[pts.fail_loc], &neg, *bf, "C2", tol)?;

    let extremes = support_extremes(pts);
    let means: Vec<f64> = pts.dists.iter().map(|d| d.mean()).collect();
    for (ti, tr) in pts.transitions.iter().enumerate() {
        let region = pts.invariants[tr.src].intersect(&tr.guard);
        if polyhedra::is_empty(&region)? {
            continue;
        }
        let (c3c, c3d) = drift_rows(cert, tr, &means, true);
        check_entailment(&region, &c3c, c3d - cert.epsilon, &format!("C3[{ti}]"), tol)?;
        for (fi, fork) in tr.forks.iter().enumerate() {
            for rhat in &extremes {
                let (c, d0) = fork_rows(cert, tr.src, fork, rhat);
                check_entailment(
                    &region,
                    &c,
                    d0 + cert.beta + 1.0,
                    &format!("C4-upper[{ti}.{fi}]"),
                    tol,
                )?;
                let neg: Vec<f64> = c.iter().map(|x| -x).collect();
                check_entailment(
                    &region,
                    &neg,
                    -d0 - cert.beta,
                    &format!("C4-lower[{ti}.{fi}]"),
                    tol,
                )?;
            }
        }
    }
    Ok(8.0 * cert.epsilon * eta_init)
}

/// Numeric C3 row: coefficients of Σ p_j·E[η∘upd_j] − η(src) and its
/// constant part (so the condition is c·v ≤ −const − ε + ...).
fn drift_rows(cert: &RepRsm, tr: &Transition, means: &[f64], expected: bool) -> (Vec<f64>, f64) {
    let n = cert.eta[tr.src].0.len();
    let mut c = vec![0.0; n];
    let mut d = 0.0;
    let (a_src, b_src) = &cert.eta[tr.src];
    for fork in &tr.forks {
        let (a_dst, b_dst) = &cert.eta[fork.dst];
        let upd = &fork.update;
        for k in 0..n {
            for i in 0..n {
                c[k] += fork.prob * a_dst[i] * upd.q[i][k];
            }
        }
        let mut shift = *b_dst;
        for i in 0..n {
            let mut ri = upd.e[i];
            if expected {
                for (j, &m) in means.iter().enumerate() {
                    ri += upd.r[i][j] * m;
                }
            }
            shift += a_dst[i] * ri;
        }
        d -= fork.prob * shift;
    }
    for k in 0..n {
        c[k] -= a_src[k];
    }
    (c, d + b_src)
}

/// Numeric C4 row for one fork at a fixed sampling point:
/// η(dst, upd(v, r̂)) − η(src, v) = c·v − d0.
fn fork_rows(cert: &RepRsm, src: usize, fork: &crate::pts::Fork, rhat: &[f64]) -> (Vec<f64>, f64) {
    let n = cert.eta[src].0.len();
    let (a_src, b_src) = &cert.eta[src];
    let (a_dst, b_dst) = &cert.eta[fork.dst];
    let upd = &fork.update;
    let mut c = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            c[k] += a_dst[i] * upd.q[i][k];
        }
        c[k] -= a_src[k];
    }
    let mut shift = b_dst - b_src;
    for i in 0..n {
        let mut ri = upd.e[i];
        for (j, &r) in rhat.iter().enumerate() {
            ri += upd.r[i][j] * r;
        }
        shift += a_dst[i] * ri;
    }
    (c, -shift)
}

/// Verifies `∀v ∈ region: c·v ≤ d` by maximizing c·v with an LP.
fn check_entailment(
    region: &Polyhedron,
    c: &[f64],
    d: f64,
    condition: &str,
    tol: f64,
) -> Result<(), HoeffdingError> {
    let mut obj = LinExpr::constant(0.0);
    for (k, &ck) in c.iter().enumerate() {
        obj.add_term(k, ck);
    }
    let mut lp = LinearProgram::new(region.dim, Sense::Max, obj);
    for (a, b) in &region.rows {
        let mut e = LinExpr::constant(-b);
        for (k, &ak) in a.iter().enumerate() {
            e.add_term(k, ak);
        }
        lp.add_le(e);
    }
    let sol = solve_lp(&lp)?;
    let (violation, witness) = match sol.status {
        LpStatus::Infeasible => return Ok(()),
        LpStatus::Unbounded => {
            // Unbounded region: require the slope along every recession
            // direction to vanish (up to rounding), then audit the bounded
            // part inside a large box.
            let mut cone = LinearProgram::new(region.dim, Sense::Max, {
                let mut obj = LinExpr::constant(0.0);
                for (k, &ck) in c.iter().enumerate() {
                    obj.add_term(k, ck);
                }
                obj
            });
            for (a, _) in &region.rows {
                let mut e = LinExpr::constant(0.0);
                for (k, &ak) in a.iter().enumerate() {
                    e.add_term(k, ak);
                }
                cone.add_le(e);
            }
            for k in 0..region.dim {
                cone.set_bounds(k, -1.0, 1.0);
            }
            let slope = solve_lp(&cone)?;
            if slope.status == LpStatus::Optimal && slope.objective > tol / RECHECK_BOX {
                return Err(HoeffdingError::CertificateCheckFailed {
                    condition: format!("{condition} (recession)"),
                    violation: slope.objective,
                    witness: slope.point,
                });
            }
            let mut boxed = lp.clone();
            for k in 0..region.dim {
                boxed.set_bounds(k, -RECHECK_BOX, RECHECK_BOX);
            }
            let sol = solve_lp(&boxed)?;
            match sol.status {
                LpStatus::Infeasible => return Ok(()),
                _ => (sol.objective - d, sol.point),
            }
        }
        LpStatus::Optimal => (sol.objective - d, sol.point),
    };
    if violation > tol {
        return Err(HoeffdingError::CertificateCheckFailed {
            condition: condition.into(),
            violation,
            witness,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::pts::{Fork, UpdateFn};

    fn immediate_term() -> Pts {
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
                forks: vec![Fork { prob: 1.0, dst: 1, update: UpdateFn::identity(1, 0) }],
            }],
            invariants: vec![
                Polyhedron::universe(1),
                Polyhedron::universe(1),
                Polyhedron::empty(1),
            ],
        }
    }

    #[test]
    fn unreachable_failure_gives_zero() {
        let out = hoeffding_synthesize(&immediate_term(), None).unwrap();
        assert!(matches!(out, HoeffdingOutcome::Zero));
        assert_eq!(out.log_bound(), f64::NEG_INFINITY);
    }

    #[test]
    fn race_bound_matches_reported_value() {
        let (pts, _, _) = corpus::instance("race", "40,0").unwrap().build().unwrap();
        let out = hoeffding_synthesize(&pts, None).unwrap();
        let lb = out.log_bound();
        let expect = (9.08e-4f64).ln();
        assert!(
            (lb - expect).abs() < (3.0f64).ln(),
            "log bound {lb} vs reported {expect}"
        );
        // The certificate was re-checked inside synthesize; also confirm the
        // reported value decomposes as 8·ε·η(init).
        if let HoeffdingOutcome::Bound { log_bound, cert } = out {
            let eta0 = cert.eval(pts.init_loc, &pts.init_val);
            assert!((log_bound - 8.0 * cert.epsilon * eta0).abs() < 1e-9);
            assert!(eta0 <= 1e-9);
        } else {
            panic!("expected a nontrivial bound");
        }
    }

    #[test]
    fn bound_is_sound_vs_oracle_on_race() {
        let (pts, _, _) = corpus::instance("race", "40,0").unwrap().build().unwrap();
        let exact = crate::oracle::vpf_exact(&pts, None, crate::oracle::VI_TOL).unwrap();
        let out = hoeffding_synthesize(&pts, None).unwrap();
        assert!(out.log_bound().exp() >= exact.at_init - 1e-9);
    }

    #[test]
    fn hoeffding_lemma_microcheck() {
        // E[exp(tX)] ≤ exp(t·E[X] + t²(b−a)²/8) for bounded X.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let k = rng.gen_range(2..5);
            let vals: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut probs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= s);
            let t: f64 = rng.gen_range(0.0..2.0);
            let mean: f64 = vals.iter().zip(&probs).map(|(v, p)| v * p).sum();
            let mgf: f64 = vals.iter().zip(&probs).map(|(v, p)| p * (t * v).exp()).sum();
            let a = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let b = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let rhs = (t * mean + t * t * (b - a) * (b - a) / 8.0).exp();
            assert!(mgf <= rhs * (1.0 + 1e-12), "{mgf} > {rhs}");
        }
    }
}
