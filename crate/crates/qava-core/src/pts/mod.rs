//! Probabilistic transition systems (PTS).
//!
//! A PTS has program variables `v`, sampling variables `r` with fixed
//! distributions, a finite set of locations including a terminal location
//! and a dedicated failure location, and guarded transitions. Each
//! transition forks probabilistically; every fork applies an affine update
//! `v' = Q·v + R·r + e` and jumps to a destination location.
//!
//! The *violation probability function* `vpf(ℓ, v)` is the probability of
//! eventually reaching the failure location from `(ℓ, v)`; it is the least
//! fixed point of the probability transformer [`ptf_value`] implemented
//! here pointwise.

mod check;
mod text;

pub use check::{check_well_formed, CheckConfig, Diagnostic, Severity};
pub use text::{parse_affine, parse_pts, parse_row, parse_rows, print_pts, TextError};

use crate::polyhedra::Polyhedron;
use thiserror::Error;

pub type LocId = usize;
pub type Valuation = Vec<f64>;

pub const GUARD_TOL: f64 = 1e-9;

/// Distribution of one sampling variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    /// Finitely many atoms `(value, probability)`.
    Discrete(Vec<(f64, f64)>),
    /// Continuous uniform on `[lo, hi]`.
    Uniform(f64, f64),
}

impl Distribution {
    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Discrete(atoms) => atoms.iter().map(|(v, p)| v * p).sum(),
            Distribution::Uniform(lo, hi) => 0.5 * (lo + hi),
        }
    }

    /// Support bounds `(min, max)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Distribution::Discrete(atoms) => atoms.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &(v, _)| (lo.min(v), hi.max(v)),
            ),
            Distribution::Uniform(lo, hi) => (*lo, *hi),
        }
    }

    /// `ln E[exp(t·X)]`, exact for both kinds.
    pub fn log_mgf(&self, t: f64) -> f64 {
        match self {
            Distribution::Discrete(atoms) => {
                let shift = atoms
                    .iter()
                    .map(|&(v, _)| t * v)
                    .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = atoms.iter().map(|&(v, p)| p * (t * v - shift).exp()).sum();
                shift + sum.ln()
            }
            Distribution::Uniform(lo, hi) => {
                crate::solvers::convex::log_uniform_mgf(*lo, *hi, t).0
            }
        }
    }

    pub fn mgf(&self, t: f64) -> f64 {
        self.log_mgf(t).exp()
    }
}

/// Affine update `v' = Q·v + R·r + e`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateFn {
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub e: Vec<f64>,
}

impl UpdateFn {
    pub fn identity(num_vars: usize, num_rvars: usize) -> Self {
        let mut q = vec![vec![0.0; num_vars]; num_vars];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        UpdateFn { q, r: vec![vec![0.0; num_rvars]; num_vars], e: vec![0.0; num_vars] }
    }

    pub fn is_identity(&self) -> bool {
        self.e.iter().all(|&c| c == 0.0)
            && self.r.iter().all(|row| row.iter().all(|&c| c == 0.0))
            && self
                .q
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, &c)| c == if i == j { 1.0 } else { 0.0 }))
    }

    /// True when the update does not read any sampling variable.
    pub fn is_deterministic(&self) -> bool {
        self.r.iter().all(|row| row.iter().all(|&c| c == 0.0))
    }

    pub fn apply(&self, v: &[f64], rvals: &[f64]) -> Valuation {
        self.q
            .iter()
            .zip(&self.r)
            .zip(&self.e)
            .map(|((qrow, rrow), &e)| {
                crate::solvers::linalg::dot(qrow, v) + crate::solvers::linalg::dot(rrow, rvals) + e
            })
            .collect()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &UpdateFn) -> UpdateFn {
        let nv = self.e.len();
        let nr = self.r.first().map_or(0, |r| r.len());
        let mut q = vec![vec![0.0; nv]; nv];
        let mut r = vec![vec![0.0; nr]; nv];
        let mut e = vec![0.0; nv];
        for i in 0..nv {
            for k in 0..nv {
                let f = self.q[i][k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..nv {
                    q[i][j] += f * first.q[k][j];
                }
                for j in 0..nr {
                    r[i][j] += f * first.r[k][j];
                }
                e[i] += f * first.e[k];
            }
            for j in 0..nr {
                r[i][j] += self.r[i][j];
            }
            e[i] += self.e[i];
        }
        UpdateFn { q, r, e }
    }
}

#[derive(Clone, Debug)]
pub struct Fork {
    pub prob: f64,
    pub dst: LocId,
    pub update: UpdateFn,
}

#[derive(Clone, Debug)]
pub struct Transition {
    pub src: LocId,
    pub guard: Polyhedron,
    pub forks: Vec<Fork>,
}

#[derive(Clone, Debug)]
pub struct Pts {
    pub var_names: Vec<String>,
    pub rvar_names: Vec<String>,
    pub dists: Vec<Distribution>,
    pub loc_names: Vec<String>,
    pub init_loc: LocId,
    pub term_loc: LocId,
    pub fail_loc: LocId,
    pub init_val: Valuation,
    pub transitions: Vec<Transition>,
    /// One invariant polyhedron per location (universe by default).
    pub invariants: Vec<Polyhedron>,
}

#[derive(Debug, Error)]
pub enum PtsError {
    #[error("expectation over a continuous distribution is not supported here")]
    ContinuousExpectation,
    #[error("unknown location label `{0}`")]
    UnknownLocation(String),
}

impl Pts {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn num_locs(&self) -> usize {
        self.loc_names.len()
    }

    pub fn loc_id(&self, name: &str) -> Result<LocId, PtsError> {
        self.loc_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PtsError::UnknownLocation(name.to_string()))
    }

    pub fn is_terminal(&self, loc: LocId) -> bool {
        loc == self.term_loc || loc == self.fail_loc
    }

    pub fn transitions_from(&self, loc: LocId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.src == loc)
    }

    /// First transition (in declaration order) whose guard holds at `v`.
    pub fn matching_transition(&self, loc: LocId, v: &[f64]) -> Option<&Transition> {
        self.transitions_from(loc).find(|t| t.guard.contains(v, GUARD_TOL))
    }

    /// The joint sampling space as `(values, probability)` pairs; an error
    /// if a continuous distribution is involved.
    pub fn sample_space(&self) -> Result<Vec<(Vec<f64>, f64)>, PtsError> {
        let mut space: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for d in &self.dists {
            let atoms = match d {
                Distribution::Discrete(a) => a,
                Distribution::Uniform(..) => return Err(PtsError::ContinuousExpectation),
            };
            let mut next = Vec::with_capacity(space.len() * atoms.len());
            for (vals, p) in &space {
                for &(v, q) in atoms {
                    let mut w = vals.clone();
                    w.push(v);
                    next.push((w, p * q));
                }
            }
            space = next;
        }
        Ok(space)
    }
}

/// One application of the probability transformer at a single state:
///
/// * `ptf(f)(ℓ_fail, v) = 1`, `ptf(f)(ℓ_term, v) = 0`,
/// * otherwise `Σ_j p_j · E_r[f(dst_j, upd_j(v, r))]` for the first
///   transition whose guard matches.
///
/// Returns `None` when no transition matches (the state is outside every
/// guard, e.g. outside the reachable region of the grid).
pub fn ptf_value(
    pts: &Pts,
    sample_space: &[(Vec<f64>, f64)],
    f: &dyn Fn(LocId, &[f64]) -> f64,
    loc: LocId,
    v: &[f64],
) -> Option<f64> {
    if loc == pts.fail_loc {
        return Some(1.0);
    }
    if loc == pts.term_loc {
        return Some(0.0);
    }
    let t = pts.matching_transition(loc, v)?;
    let mut acc = 0.0;
    for fork in &t.forks {
        let mut expect = 0.0;
        for (rvals, p) in sample_space {
            let w = fork.update.apply(v, rvals);
            expect += p * f(fork.dst, &w);
        }
        acc += fork.prob * expect;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_log_mgf_matches_direct_sum() {
        let d = Distribution::Discrete(vec![(1.0, 0.5), (-1.0, 0.5)]);
        for &t in &[0.0, 0.3, -2.0, 5.0] {
            let direct: f64 = 0.5 * (t * 1.0f64).exp() + 0.5 * (-t).exp();
            assert!((d.log_mgf(t) - direct.ln()).abs() < 1e-12);
        }
        assert_eq!(d.mean(), 0.0);
    }

    #[test]
    fn uniform_mgf_at_zero_is_one() {
        let d = Distribution::Uniform(2.0, 5.0);
        assert!(d.log_mgf(0.0).abs() < 1e-12);
        assert!((d.mean() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn update_compose_matches_sequential_apply() {
        // u1: x := x + 1; u2: x := 2x  ⇒  (u2 ∘ u1)(x) = 2x + 2.
        let nv = 1;
        let mut u1 = UpdateFn::identity(nv, 0);
        u1.e[0] = 1.0;
        let mut u2 = UpdateFn::identity(nv, 0);
        u2.q[0][0] = 2.0;
        let c = u2.compose(&u1);
        let out = c.apply(&[3.0], &[]);
        assert_eq!(out, vec![8.0]);
    }
}
