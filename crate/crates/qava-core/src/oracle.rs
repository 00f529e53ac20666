//! Ground-truth violation probabilities.
//!
//! For programs with integer-lattice dynamics and finitely many reachable
//! states, `vpf_exact` computes vpf = lfp ptf by Kleene iteration from ⊥
//! over an explicitly enumerated state grid. For everything else,
//! `mc_estimate` simulates the PTS process; its `Survival` mode removes
//! terminating forks from the sampling and accounts for them as a
//! multiplicative survival weight, which estimates tiny complement
//! probabilities (hardware benchmarks) without astronomically many trials.
//!
//! The RNG is ChaCha8, a counter-based generator with 2⁶⁴ independent
//! streams; trial `k` always uses stream `k` of the given seed, so results
//! are bit-reproducible regardless of thread count.

use crate::corpus::Truncation;
use crate::pts::{LocId, Pts};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state space exceeds {0} states and no truncation box was given")]
    GridClosureFailure(usize),
    #[error("continuous distribution: the exact oracle needs discrete sampling")]
    NonDiscreteDistribution,
    #[error("update leaves the integer lattice at {0:?}")]
    NonIntegerDynamics(Vec<f64>),
    #[error("no transition matches state ({0}, {1:?})")]
    IncompleteGuards(LocId, Vec<i64>),
}

const STATE_CAP: usize = 4_000_000;
pub const VI_TOL: f64 = 1e-13;
pub const VI_MAX_ITERS: usize = 1_000_000;

/// One-step successor of a non-terminal grid state.
enum Step {
    /// Forks as (probability, successor index); absorbed successors are
    /// folded into `fail_mass`.
    Forks { to: Vec<(f64, u32)>, fail_mass: f64 },
}

/// Explicit enumeration of the reachable states of an integer-lattice PTS,
/// breadth-first from the initial state, with the one-step transition
/// structure precomputed.
pub struct StateGrid {
    pub states: Vec<(LocId, Vec<i64>)>,
    index: HashMap<(LocId, Vec<i64>), u32>,
    steps: Vec<Option<Step>>,
    /// 1 for failure states, 0 for terminal, None otherwise.
    absorbing: Vec<Option<f64>>,
    pub init_index: usize,
}

fn to_lattice(v: &[f64]) -> Result<Vec<i64>, OracleError> {
    v.iter()
        .map(|&x| {
            let r = x.round();
            if (x - r).abs() < 1e-6 && r.abs() < 9e15 {
                Ok(r as i64)
            } else {
                Err(OracleError::NonIntegerDynamics(v.to_vec()))
            }
        })
        .collect()
}

fn in_box(v: &[i64], bounds: &[(f64, f64)]) -> bool {
    v.iter().zip(bounds).all(|(&x, &(lo, hi))| (x as f64) >= lo && (x as f64) <= hi)
}

/// Enumerates all states reachable from the initial state. With a
/// truncation box, out-of-box states are absorbed (as failure when
/// `to_fail`, else as termination); without one, enumeration fails once
/// the cap is exceeded.
pub fn build_grid(pts: &Pts, trunc: Option<&Truncation>) -> Result<StateGrid, OracleError> {
    let space = pts.sample_space().map_err(|_| OracleError::NonDiscreteDistribution)?;
    let init = to_lattice(&pts.init_val)?;
    let mut grid = StateGrid {
        states: Vec::new(),
        index: HashMap::new(),
        steps: Vec::new(),
        absorbing: Vec::new(),
        init_index: 0,
    };
    let mut intern = |grid: &mut StateGrid, loc: LocId, v: Vec<i64>| -> u32 {
        if let Some(&i) = grid.index.get(&(loc, v.clone())) {
            return i;
        }
        let i = grid.states.len() as u32;
        grid.index.insert((loc, v.clone()), i);
        grid.states.push((loc, v));
        grid.steps.push(None);
        grid.absorbing.push(if loc == pts.fail_loc {
            Some(1.0)
        } else if loc == pts.term_loc {
            Some(0.0)
        } else {
            None
        });
        i
    };
    let start = intern(&mut grid, pts.init_loc, init);
    grid.init_index = start as usize;
    let mut frontier = vec![start];
    while let Some(i) = frontier.pop() {
        if grid.absorbing[i as usize].is_some() {
            continue;
        }
        if grid.states.len() > STATE_CAP {
            return Err(OracleError::GridClosureFailure(STATE_CAP));
        }
        let (loc, v) = grid.states[i as usize].clone();
        let vf: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        let t = pts
            .matching_transition(loc, &vf)
            .ok_or(OracleError::IncompleteGuards(loc, v.clone()))?;
        let mut to = Vec::new();
        let mut fail_mass = 0.0;
        for fork in &t.forks {
            for (rvals, pr) in &space {
                let p = fork.prob * pr;
                if p == 0.0 {
                    continue;
                }
                let next = to_lattice(&fork.update.apply(&vf, rvals))?;
                let absorbed = trunc
                    .filter(|tr| !in_box(&next, &tr.var_bounds))
                    .map(|tr| if tr.to_fail { 1.0 } else { 0.0 });
                if let Some(val) = absorbed {
                    fail_mass += p * val;
                    continue;
                }
                let j = intern(&mut grid, fork.dst, next);
                if grid.steps[j as usize].is_none() && grid.absorbing[j as usize].is_none() {
                    frontier.push(j);
                }
                to.push((p, j));
            }
        }
        grid.steps[i as usize] = Some(Step::Forks { to, fail_mass });
    }
    Ok(grid)
}

impl StateGrid {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, loc: LocId, v: &[i64]) -> Option<usize> {
        self.index.get(&(loc, v.to_vec())).map(|&i| i as usize)
    }
}

/// One application of the probability transformer to a tabulated function:
/// value 1 at failure states, 0 at terminal states, one-step expectation
/// elsewhere.
pub fn apply_ptf(grid: &StateGrid, f: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), grid.len());
    (0..grid.len())
        .map(|i| match (&grid.absorbing[i], &grid.steps[i]) {
            (Some(v), _) => *v,
            (None, Some(Step::Forks { to, fail_mass })) => {
                fail_mass + to.iter().map(|&(p, j)| p * f[j as usize]).sum::<f64>()
            }
            (None, None) => unreachable!("non-absorbing state without successors"),
        })
        .collect()
}

/// Kleene iteration of ptf from `start` until the sup-norm step falls
/// below `tol`; returns the table, iteration count, and final step size.
pub fn value_iterate(grid: &StateGrid, start: Vec<f64>, tol: f64) -> (Vec<f64>, usize, f64) {
    let mut f = start;
    for it in 1..=VI_MAX_ITERS {
        let g = apply_ptf(grid, &f);
        let diff =
            f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        f = g;
        if diff < tol {
            return (f, it, diff);
        }
    }
    let g = apply_ptf(grid, &f);
    let diff = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    (g, VI_MAX_ITERS, diff)
}

/// Exact violation probability table and its value at the initial state.
pub struct ExactVpf {
    pub grid: StateGrid,
    pub table: Vec<f64>,
    pub at_init: f64,
    pub iterations: usize,
}

/// Computes vpf = lfp ptf by iteration from ⊥ (all zeros).
pub fn vpf_exact(
    pts: &Pts,
    trunc: Option<&Truncation>,
    tol: f64,
) -> Result<ExactVpf, OracleError> {
    let grid = build_grid(pts, trunc)?;
    let (table, iterations, _) = value_iterate(&grid, vec![0.0; grid.len()], tol);
    let at_init = table[grid.init_index];
    Ok(ExactVpf { grid, table, at_init, iterations })
}

// ---------------------------------------------------------------------------
// Monte Carlo

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McMode {
    /// Count trajectories that reach the failure location.
    Sample,
    /// Remove forks into the terminal location from the sampling and carry
    /// their mass as a per-trial survival weight; the weighted mean is an
    /// unbiased estimate of the failure probability with far lower variance
    /// when termination hazards are tiny.
    Survival,
}

#[derive(Clone, Debug)]
pub struct McEstimate {
    pub trials: u64,
    /// Failure count (`Sample` mode only; 0 in `Survival` mode).
    pub hits: u64,
    /// Trials stopped by the step cap, counted as non-failures.
    pub inconclusive: u64,
    pub point: f64,
    pub ci95: (f64, f64),
    pub ci99: (f64, f64),
}

const STEP_CAP: u64 = 10_000_000;
const Z95: f64 = 1.959963984540054;
const Z99: f64 = 2.5758293035489004;

fn wilson(hits: f64, n: f64, z: f64) -> (f64, f64) {
    let p = hits / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()) / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn sample_dist(d: &crate::pts::Distribution, rng: &mut ChaCha8Rng) -> f64 {
    match d {
        crate::pts::Distribution::Discrete(atoms) => {
            let mut u: f64 = rng.gen();
            for &(v, p) in atoms {
                if u < p {
                    return v;
                }
                u -= p;
            }
            atoms.last().map(|&(v, _)| v).unwrap_or(0.0)
        }
        crate::pts::Distribution::Uniform(lo, hi) => rng.gen_range(*lo..*hi),
    }
}

/// One trajectory; returns (weight, capped). In `Sample` mode the weight is
/// 1.0 on failure and 0.0 otherwise; in `Survival` mode it is the product
/// of survived termination hazards when the failure location is reached.
fn run_trial(pts: &Pts, mode: McMode, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let mut loc = pts.init_loc;
    let mut v = pts.init_val.clone();
    let mut log_weight = 0.0f64;
    for _ in 0..STEP_CAP {
        if loc == pts.fail_loc {
            return (log_weight.exp(), false);
        }
        if loc == pts.term_loc {
            return (0.0, false);
        }
        let Some(t) = pts.matching_transition(loc, &v) else {
            return (0.0, false);
        };
        let rvals: Vec<f64> = pts.dists.iter().map(|d| sample_dist(d, rng)).collect();
        let (choices, norm) = match mode {
            McMode::Sample => (t.forks.iter().collect::<Vec<_>>(), 1.0),
            McMode::Survival => {
                let live: Vec<_> =
                    t.forks.iter().filter(|f| f.dst != pts.term_loc).collect();
                let mass: f64 = live.iter().map(|f| f.prob).sum();
                if mass <= 0.0 {
                    return (0.0, false);
                }
                log_weight += mass.ln();
                (live, mass)
            }
        };
        let mut u: f64 = rng.gen::<f64>() * norm;
        let mut chosen = choices[choices.len() - 1];
        for f in &choices {
            if u < f.prob {
                chosen = f;
                break;
            }
            u -= f.prob;
        }
        v = chosen.update.apply(&v, &rvals);
        loc = chosen.dst;
    }
    (0.0, true)
}

/// Estimates the violation probability by simulation. Identical seeds give
/// identical results for any `threads` value.
pub fn mc_estimate(pts: &Pts, trials: u64, seed: u64, mode: McMode, threads: usize) -> McEstimate {
    let threads = threads.max(1);
    let chunk = trials.div_ceil(threads as u64);
    let mut partials: Vec<(f64, f64, u64, u64)> = Vec::new();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads as u64)
            .map(|w| {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(trials);
                s.spawn(move || {
                    let mut sum = 0.0f64;
                    let mut sumsq = 0.0f64;
                    let mut hits = 0u64;
                    let mut capped = 0u64;
                    for trial in lo..hi {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(trial);
                        let (w, cap) = run_trial(pts, mode, &mut rng);
                        sum += w;
                        sumsq += w * w;
                        if w == 1.0 && mode == McMode::Sample {
                            hits += 1;
                        }
                        if cap {
                            capped += 1;
                        }
                    }
                    (sum, sumsq, hits, capped)
                })
            })
            .collect();
        for h in handles {
            partials.push(h.join().expect("worker panicked"));
        }
    });
    let sum: f64 = partials.iter().map(|p| p.0).sum();
    let sumsq: f64 = partials.iter().map(|p| p.1).sum();
    let hits: u64 = partials.iter().map(|p| p.2).sum();
    let inconclusive: u64 = partials.iter().map(|p| p.3).sum();
    let n = trials as f64;
    let point = sum / n;
    let (ci95, ci99) = match mode {
        McMode::Sample => (wilson(sum, n, Z95), wilson(sum, n, Z99)),
        McMode::Survival => {
            let var = ((sumsq - sum * sum / n) / (n - 1.0).max(1.0)).max(0.0);
            let se = (var / n).sqrt();
            (
                ((point - Z95 * se).max(0.0), (point + Z95 * se).min(1.0)),
                ((point - Z99 * se).max(0.0), (point + Z99 * se).min(1.0)),
            )
        }
    };
    McEstimate { trials, hits, inconclusive, point, ci95, ci99 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::polyhedra::Polyhedron;
    use crate::pts::{Fork, Transition, UpdateFn};

    fn coin_pts(p_fail: f64) -> Pts {
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
                forks: vec![
                    Fork { prob: p_fail, dst: 2, update: UpdateFn::identity(1, 0) },
                    Fork { prob: 1.0 - p_fail, dst: 1, update: UpdateFn::identity(1, 0) },
                ],
            }],
            invariants: vec![Polyhedron::universe(1); 3],
        }
    }

    #[test]
    fn trivial_reachability_probabilities() {
        let exact = vpf_exact(&coin_pts(1.0), None, VI_TOL).unwrap();
        assert_eq!(exact.at_init, 1.0);
        let exact = vpf_exact(&coin_pts(0.0), None, VI_TOL).unwrap();
        assert_eq!(exact.at_init, 0.0);
        let exact = vpf_exact(&coin_pts(0.5), None, VI_TOL).unwrap();
        assert!((exact.at_init - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kleene_iterates_are_monotone_and_bounded() {
        let inst = corpus::instance("race", "40,0").unwrap();
        let (pts, _, _) = inst.build().unwrap();
        let grid = build_grid(&pts, None).unwrap();
        let mut f = vec![0.0; grid.len()];
        for _ in 0..50 {
            let g = apply_ptf(&grid, &f);
            for (a, b) in f.iter().zip(&g) {
                assert!(b + 1e-15 >= *a, "not monotone");
                assert!((0.0..=1.0).contains(b));
            }
            f = g;
        }
    }

    #[test]
    fn race_oracle_value() {
        // Absorbing-chain ground truth: the hare gains +2 with probability
        // 1/2 per round; once the tortoise has taken its 60th step the loop
        // head already sees x = 100 and the assertion passes, so failure is
        // exactly "50 hare wins within 59 rounds": Σ_{k≥50} C(59,k) 2^{−59}.
        let mut tail = 0.0f64;
        let ln_fact = |n: u64| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
        for k in 50..=59u64 {
            tail += (ln_fact(59) - ln_fact(k) - ln_fact(59 - k)
                - 59.0 * (2.0f64).ln())
            .exp();
        }
        let inst = corpus::instance("race", "40,0").unwrap();
        let (pts, _, _) = inst.build().unwrap();
        let exact = vpf_exact(&pts, None, VI_TOL).unwrap();
        assert!(
            (exact.at_init - tail).abs() < 1e-12,
            "oracle {} vs binomial tail {tail}",
            exact.at_init
        );
    }

    #[test]
    fn gfp_equals_lfp_on_terminating_benchmark() {
        let inst = corpus::instance("race", "40,0").unwrap();
        let (pts, _, _) = inst.build().unwrap();
        let grid = build_grid(&pts, None).unwrap();
        let (lo, _, _) = value_iterate(&grid, vec![0.0; grid.len()], VI_TOL);
        let top: Vec<f64> = (0..grid.len())
            .map(|i| if grid.states[i].0 == pts.term_loc { 0.0 } else { 1.0 })
            .collect();
        let (hi, _, _) = value_iterate(&grid, top, VI_TOL);
        let diff =
            lo.iter().zip(&hi).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        assert!(diff < 1e-10, "gfp/lfp gap {diff}");
    }

    #[test]
    fn mc_covers_truth_and_is_deterministic() {
        let est = mc_estimate(&coin_pts(0.3), 200_000, 7, McMode::Sample, 4);
        assert!(
            est.ci99.0 <= 0.3 && 0.3 <= est.ci99.1,
            "0.3 outside Wilson99 {:?}",
            est.ci99
        );
        let inst = corpus::instance("race", "40,0").unwrap();
        let (pts, _, _) = inst.build().unwrap();
        let est1 = mc_estimate(&pts, 10_000, 7, McMode::Sample, 1);
        let est3 = mc_estimate(&pts, 10_000, 7, McMode::Sample, 3);
        assert_eq!(est1.hits, est3.hits);
        assert_eq!(est1.point, est3.point);
    }

    #[test]
    fn survival_mode_matches_exact_on_m1dwalk() {
        let inst = corpus::instance("m1dwalk", "1e-4").unwrap();
        let (pts, _, _) = inst.build().unwrap();
        let exact = vpf_exact(&pts, inst.truncation.as_ref(), VI_TOL).unwrap();
        assert!((exact.at_init - 0.984127).abs() < 5e-4, "oracle {}", exact.at_init);
        let est = mc_estimate(&pts, 20_000, 11, McMode::Survival, 4);
        assert!(
            est.ci99.0 <= exact.at_init && exact.at_init <= est.ci99.1,
            "oracle {} outside survival CI {:?}",
            exact.at_init,
            est.ci99
        );
    }

    #[test]
    fn newton_and_ref_oracles_match_closed_form() {
        let (pts, _, _) = corpus::instance("newton", "5e-4").unwrap().build().unwrap();
        let exact = vpf_exact(&pts, None, VI_TOL).unwrap();
        let per_iter = 14.0 * (1.0f64 - 5e-4).ln() + 2.0 * 0.9999f64.ln();
        let expect = (44.0 * per_iter).exp();
        assert!((exact.at_init - expect).abs() < 1e-9, "{} vs {expect}", exact.at_init);

        let (pts, _, _) = corpus::instance("ref", "1e-7").unwrap().build().unwrap();
        let exact = vpf_exact(&pts, None, VI_TOL).unwrap();
        let expect = (15_380.0 * (1.0f64 - 1e-7).ln()).exp();
        assert!((exact.at_init - expect).abs() < 1e-9, "{} vs {expect}", exact.at_init);
    }
}
