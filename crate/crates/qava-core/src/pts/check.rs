//! Structural and semantic well-formedness checks for a PTS.

use super::{Pts, GUARD_TOL};
use crate::polyhedra::{self, Polyhedron};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(msg: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: msg.into() }
    }
    fn warning(msg: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: msg.into() }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckConfig {
    /// Skip the guard-coverage check (for hand-written systems whose
    /// guards are known to partition each invariant).
    pub trust_complete: bool,
    /// All program data is integer valued, so the complement of `a·v ≤ b`
    /// tightens to `a·v ≥ b + 1`. Without this the coverage check uses the
    /// closed complement `a·v ≥ b`, which is conservative over the reals.
    pub integral: bool,
}

/// Cap on the number of row combinations explored by the coverage check;
/// beyond this the check is skipped with a warning.
const COVERAGE_CAP: usize = 4096;

/// Validates fork probabilities, guard mutual exclusion, guard coverage,
/// dimension consistency, and the initial state. Returns all findings;
/// a PTS is well formed iff none of them has `Severity::Error`.
pub fn check_well_formed(pts: &Pts, config: CheckConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let nv = pts.num_vars();

    if pts.init_val.len() != nv {
        out.push(Diagnostic::error(format!(
            "initial valuation has {} entries for {} variables",
            pts.init_val.len(),
            nv
        )));
    }
    if pts.term_loc == pts.fail_loc {
        out.push(Diagnostic::error("terminal and failure locations coincide"));
    }
    if pts.invariants.len() != pts.num_locs() {
        out.push(Diagnostic::error("invariant count does not match location count"));
    }

    for t in &pts.transitions {
        let name = &pts.loc_names[t.src];
        if pts.is_terminal(t.src) {
            out.push(Diagnostic::error(format!(
                "terminal location `{name}` has an outgoing transition"
            )));
        }
        if t.guard.dim != nv {
            out.push(Diagnostic::error(format!(
                "guard at `{name}` has dimension {} (expected {nv})",
                t.guard.dim
            )));
        }
        let total: f64 = t.forks.iter().map(|f| f.prob).sum();
        if (total - 1.0).abs() > 1e-12 {
            out.push(Diagnostic::error(format!(
                "fork probabilities at `{name}` sum to {total}, not 1"
            )));
        }
        for f in &t.forks {
            if !(0.0..=1.0).contains(&f.prob) {
                out.push(Diagnostic::error(format!(
                    "fork probability {} at `{name}` is outside [0,1]",
                    f.prob
                )));
            }
            if f.update.e.len() != nv {
                out.push(Diagnostic::error(format!(
                    "update at `{name}` has wrong dimension"
                )));
            }
        }
    }

    // Initial state must satisfy its invariant.
    if pts.init_val.len() == nv && !pts.invariants[pts.init_loc].contains(&pts.init_val, GUARD_TOL)
    {
        out.push(Diagnostic::error("initial valuation violates the initial invariant"));
    }

    // Guard mutual exclusion: pairwise open-interior intersection must be
    // empty (shared boundary faces are allowed).
    for loc in 0..pts.num_locs() {
        let ts: Vec<_> = pts.transitions_from(loc).collect();
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                let both = ts[i].guard.intersect(&ts[j].guard).intersect(&pts.invariants[loc]);
                match polyhedra::is_empty_interior(&both, GUARD_TOL) {
                    Ok(true) => {}
                    Ok(false) => out.push(Diagnostic::error(format!(
                        "guards {} and {} at `{}` overlap",
                        i, j, pts.loc_names[loc]
                    ))),
                    Err(e) => out.push(Diagnostic::warning(format!(
                        "mutual-exclusion check failed at `{}`: {e}",
                        pts.loc_names[loc]
                    ))),
                }
            }
        }
        if !config.trust_complete && !pts.is_terminal(loc) {
            if let Some(d) = check_coverage(pts, loc, &ts, config.integral) {
                out.push(d);
            }
        }
    }
    out
}

/// Checks `I(ℓ) ∧ ¬φ₁ ∧ … ∧ ¬φ_k = ∅` by expanding the negations into
/// their disjuncts (one negated row per guard) and testing every
/// combination. Negated rows are closed (`a·v ≥ b`), which over-approximates
/// the true complement, so a pass here soundly implies coverage.
fn check_coverage(
    pts: &Pts,
    loc: usize,
    ts: &[&super::Transition],
    integral: bool,
) -> Option<Diagnostic> {
    // Complement of `a·v ≤ b`: exact `a·v ≥ b+1` on integral programs,
    // otherwise `a·v ≥ b+δ` for a small scaled δ — boundary-sharing closed
    // splits then still count as covering, and only full-dimensional gaps
    // are reported.
    let shift = if integral {
        1.0
    } else {
        let scale = ts
            .iter()
            .flat_map(|t| t.guard.rows.iter().map(|(_, b)| b.abs()))
            .chain(pts.invariants[loc].rows.iter().map(|(_, b)| b.abs()))
            .fold(1.0f64, f64::max);
        crate::pts::GUARD_TOL * 100.0 * (1.0 + scale)
    };
    let inv = &pts.invariants[loc];
    if ts.is_empty() {
        return match polyhedra::is_empty(inv) {
            Ok(true) => None,
            _ => Some(Diagnostic::error(format!(
                "location `{}` has no outgoing transitions but a nonempty invariant",
                pts.loc_names[loc]
            ))),
        };
    }
    let combos: usize = ts
        .iter()
        .map(|t| t.guard.rows.len().max(1))
        .try_fold(1usize, |a, b| a.checked_mul(b))
        .unwrap_or(usize::MAX);
    if combos > COVERAGE_CAP {
        return Some(Diagnostic::warning(format!(
            "coverage check at `{}` skipped ({} combinations exceed cap {})",
            pts.loc_names[loc], combos, COVERAGE_CAP
        )));
    }
    let mut idx = vec![0usize; ts.len()];
    loop {
        let mut p: Polyhedron = inv.clone();
        let mut trivially_empty = false;
        for (t, &i) in ts.iter().zip(&idx) {
            if t.guard.rows.is_empty() {
                trivially_empty = true; // guard `true`: complement empty
                break;
            }
            let (a, b) = &t.guard.rows[i];
            p.add_row(a.iter().map(|&c| -c).collect(), -b - shift);
        }
        if !trivially_empty {
            match polyhedra::is_empty(&p) {
                Ok(true) => {}
                _ => {
                    return Some(Diagnostic::error(format!(
                        "guards at `{}` do not cover the invariant",
                        pts.loc_names[loc]
                    )))
                }
            }
        }
        // Advance the mixed-radix counter.
        let mut k = 0;
        loop {
            if k == ts.len() {
                return None;
            }
            idx[k] += 1;
            if idx[k] < ts[k].guard.rows.len().max(1) {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pts::{Distribution, Fork, Transition, UpdateFn};

    /// x := 0; while (x ≤ 1) { x := x + 1 }  with a split on x afterwards.
    fn tiny_pts() -> Pts {
        let guard_in = Polyhedron { dim: 1, rows: vec![(vec![1.0], 1.0)] };
        let guard_out = Polyhedron { dim: 1, rows: vec![(vec![-1.0], -2.0)] };
        let mut inc = UpdateFn::identity(1, 0);
        inc.e[0] = 1.0;
        Pts {
            var_names: vec!["x".into()],
            rvar_names: vec![],
            dists: vec![],
            loc_names: vec!["l0".into(), "term".into(), "fail".into()],
            init_loc: 0,
            term_loc: 1,
            fail_loc: 2,
            init_val: vec![0.0],
            transitions: vec![
                Transition {
                    src: 0,
                    guard: guard_in,
                    forks: vec![Fork { prob: 1.0, dst: 0, update: inc }],
                },
                Transition {
                    src: 0,
                    guard: guard_out,
                    forks: vec![Fork { prob: 1.0, dst: 1, update: UpdateFn::identity(1, 0) }],
                },
            ],
            invariants: vec![Polyhedron::universe(1); 3],
        }
    }

    #[test]
    fn tiny_pts_is_well_formed() {
        let pts = tiny_pts();
        let diags =
            check_well_formed(&pts, CheckConfig { integral: true, ..CheckConfig::default() });
        assert!(
            diags.iter().all(|d| d.severity != Severity::Error),
            "unexpected errors: {diags:?}"
        );
    }

    #[test]
    fn bad_fork_probabilities_are_flagged() {
        let mut pts = tiny_pts();
        pts.transitions[0].forks[0].prob = 0.75;
        let diags = check_well_formed(&pts, CheckConfig::default());
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("sum to")));
    }

    #[test]
    fn overlapping_guards_are_flagged() {
        let mut pts = tiny_pts();
        // Widen the exit guard to x ≥ 0, overlapping x ≤ 1 on [0,1].
        pts.transitions[1].guard = Polyhedron { dim: 1, rows: vec![(vec![-1.0], 0.0)] };
        let diags = check_well_formed(&pts, CheckConfig::default());
        assert!(diags.iter().any(|d| d.message.contains("overlap")));
    }

    #[test]
    fn coverage_gap_is_flagged() {
        let mut pts = tiny_pts();
        // Exit guard x ≥ 3 leaves the band (1, 2) uncovered... and the
        // closed complement check must notice the gap at x = 1.5.
        pts.transitions[1].guard = Polyhedron { dim: 1, rows: vec![(vec![-1.0], -3.0)] };
        let diags =
            check_well_formed(&pts, CheckConfig { integral: true, ..CheckConfig::default() });
        assert!(diags.iter().any(|d| d.message.contains("cover")));
    }

    #[test]
    fn ptf_value_on_tiny_chain() {
        // Replace the exit by a coin flip into term/fail and check ptf.
        let mut pts = tiny_pts();
        pts.transitions[1].forks = vec![
            Fork { prob: 0.5, dst: 1, update: UpdateFn::identity(1, 0) },
            Fork { prob: 0.5, dst: 2, update: UpdateFn::identity(1, 0) },
        ];
        let space = pts.sample_space().unwrap();
        let f = |loc: usize, _v: &[f64]| if loc == 2 { 1.0 } else { 0.0 };
        // At x = 2 the coin-flip transition fires: value 0.5.
        let v = super::super::ptf_value(&pts, &space, &f, 0, &[2.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // Terminal locations are pinned.
        assert_eq!(super::super::ptf_value(&pts, &space, &f, 1, &[0.0]), Some(0.0));
        assert_eq!(super::super::ptf_value(&pts, &space, &f, 2, &[0.0]), Some(1.0));
    }

    #[test]
    fn discrete_update_expectation() {
        // x := x + r with r ∈ {−1 (¼), +1 (¾)}; f = value of x.
        let mut pts = tiny_pts();
        pts.rvar_names = vec!["r".into()];
        pts.dists = vec![Distribution::Discrete(vec![(-1.0, 0.25), (1.0, 0.75)])];
        let mut upd = UpdateFn::identity(1, 1);
        upd.r[0][0] = 1.0;
        pts.transitions[0].forks[0].update = upd;
        pts.transitions[1].forks[0].update = UpdateFn::identity(1, 1);
        let space = pts.sample_space().unwrap();
        let f = |_loc: usize, v: &[f64]| v[0];
        let got = super::super::ptf_value(&pts, &space, &f, 0, &[0.0]).unwrap();
        assert!((got - 0.5).abs() < 1e-15, "E[x + r] = 0.5, got {got}");
    }
}
