//! Closed convex polyhedra `{v | A·v ≤ b}` and the three operations the
//! synthesizers need:
//!
//! * emptiness via an LP feasibility check,
//! * `decompose`: a generator representation (vertices + recession-cone
//!   rays) via the double-description method, with implicit equalities
//!   detected by two-sided LPs and removed before enumeration,
//! * `farkas_encode`: the linear encoding of `P ⊆ {v | c·v ≤ d}` with
//!   fresh nonnegative multipliers, where `c` and `d` may be affine in
//!   template unknowns.

use crate::solvers::{self, linalg, LinExpr, LinearProgram, LpStatus, Sense, VarPool};
use serde::Serialize;
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const MAX_DIM: usize = 12;
const MAX_GENERATORS: usize = 100_000;

/// `{v ∈ ℝ^dim | rows.0·v ≤ rows.1}`. An empty `rows` list is the universe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyhedron {
    pub dim: usize,
    pub rows: Vec<(Vec<f64>, f64)>,
}

impl Polyhedron {
    pub fn universe(dim: usize) -> Self {
        Polyhedron { dim, rows: Vec::new() }
    }

    /// A canonical empty polyhedron (`0·v ≤ −1`).
    pub fn empty(dim: usize) -> Self {
        Polyhedron { dim, rows: vec![(vec![0.0; dim], -1.0)] }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, bound: f64) {
        debug_assert_eq!(coeffs.len(), self.dim);
        self.rows.push((coeffs, bound));
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        debug_assert_eq!(self.dim, other.dim);
        let mut p = self.clone();
        p.rows.extend(other.rows.iter().cloned());
        p
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|(a, b)| linalg::dot(a, v) <= b + tol)
    }

    /// The same constraint set with every row tightened by `slack`.
    pub fn shrunk(&self, slack: f64) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            rows: self.rows.iter().map(|(a, b)| (a.clone(), b - slack)).collect(),
        }
    }

    /// Homogeneous version `{v | A·v ≤ 0}` (the recession cone).
    pub fn recession_cone(&self) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            rows: self.rows.iter().map(|(a, _)| (a.clone(), 0.0)).collect(),
        }
    }
}

/// `conv(vertices) + cone(rays)`; rays are scaled to unit ∞-norm.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GeneratorRep {
    pub vertices: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("polyhedron is empty; no generator representation exists")]
    Empty,
    #[error("dimension {0} exceeds the supported cap of {MAX_DIM}")]
    DimensionCap(usize),
    #[error("generator count exceeded the cap of {MAX_GENERATORS}")]
    GeneratorCap,
    #[error("linear program failed during polyhedron analysis: {0}")]
    Lp(#[from] solvers::simplex::LpError),
}

fn feasibility_lp(p: &Polyhedron) -> LinearProgram {
    let mut lp = LinearProgram::new(p.dim, Sense::Min, LinExpr::constant(0.0));
    for (a, b) in &p.rows {
        let mut e = LinExpr::constant(-b);
        for (i, &c) in a.iter().enumerate() {
            e.add_term(i, c);
        }
        lp.add_le(e);
    }
    lp
}

/// Emptiness of the closed polyhedron, decided by LP feasibility.
pub fn is_empty(p: &Polyhedron) -> Result<bool, PolyError> {
    Ok(solvers::solve_lp(&feasibility_lp(p))?.status == LpStatus::Infeasible)
}

/// Interior slack for `p` at relative tolerance `tol`: scaled by the row
/// bounds so that the tightening stays above the LP feasibility threshold.
pub fn interior_slack(p: &Polyhedron, tol: f64) -> f64 {
    let scale = p.rows.iter().map(|(_, b)| b.abs()).fold(0.0f64, f64::max);
    tol * 100.0 * (1.0 + scale)
}

/// Emptiness of the interior-tightened polyhedron (all rows shifted in by
/// a slack scaled from `tol`); used for mutual-exclusion checks where
/// shared boundary faces must not count as overlap.
pub fn is_empty_interior(p: &Polyhedron, tol: f64) -> Result<bool, PolyError> {
    is_empty(&p.shrunk(interior_slack(p, tol)))
}

/// Maximizes `a·v` over `p`; `None` when unbounded.
fn maximize(p: &Polyhedron, a: &[f64]) -> Result<Option<f64>, PolyError> {
    let mut obj = LinExpr::default();
    for (i, &c) in a.iter().enumerate() {
        obj.add_term(i, c);
    }
    let mut lp = feasibility_lp(p);
    lp.sense = Sense::Max;
    lp.objective = obj;
    let sol = solvers::solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.objective),
        _ => None,
    })
}

/// Computes the generator representation of a nonempty polyhedron.
pub fn decompose(p: &Polyhedron) -> Result<GeneratorRep, PolyError> {
    if p.dim > MAX_DIM {
        return Err(PolyError::DimensionCap(p.dim));
    }
    if is_empty(p)? {
        return Err(PolyError::Empty);
    }

    // Implicit equalities: row a·v ≤ b is an equality on P iff min a·v ≥ b.
    let mut eq_rows: Vec<Vec<f64>> = Vec::new();
    let mut eq_rhs: Vec<f64> = Vec::new();
    for (a, b) in &p.rows {
        let neg: Vec<f64> = a.iter().map(|&c| -c).collect();
        if let Some(neg_min) = maximize(p, &neg)? {
            if -neg_min >= b - PIVOT_TOL {
                eq_rows.push(a.clone());
                eq_rhs.push(*b);
            }
        }
    }

    // Restrict to the affine hull: v = v0 + N·u.
    let (v0, basis) = if eq_rows.is_empty() {
        (vec![0.0; p.dim], identity_basis(p.dim))
    } else {
        let mut aug: Vec<Vec<f64>> = eq_rows
            .iter()
            .zip(&eq_rhs)
            .map(|(a, &b)| {
                let mut r = a.clone();
                r.push(b);
                r
            })
            .collect();
        let pivots = linalg::row_reduce(&mut aug, PIVOT_TOL);
        let mut v0 = vec![0.0; p.dim];
        for (row, &pc) in aug.iter().zip(&pivots) {
            if pc < p.dim {
                v0[pc] = row[p.dim];
            }
        }
        (v0.clone(), linalg::null_space(&eq_rows, p.dim, PIVOT_TOL))
    };
    let k = basis.len();
    if k == 0 {
        // Single point.
        return Ok(GeneratorRep { vertices: vec![v0], rays: Vec::new() });
    }

    // Reduced inequality rows: a·(v0 + N·u) ≤ b  ⇒  (aᵀN)·u ≤ b − a·v0.
    let mut red_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in &p.rows {
        let coeffs: Vec<f64> = basis.iter().map(|col| linalg::dot(a, col)).collect();
        let rhs = b - linalg::dot(a, &v0);
        if coeffs.iter().all(|c| c.abs() <= PIVOT_TOL) {
            continue; // implicit equality or trivially satisfied
        }
        red_rows.push((coeffs, rhs));
    }

    // Homogenize: cone over (u, t) with rows (a, −b) plus (0, −1).
    let mut cone: Vec<Vec<f64>> = red_rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(-b);
            r
        })
        .collect();
    let mut t_row = vec![0.0; k + 1];
    t_row[k] = -1.0;
    cone.push(t_row);

    let gens = enumerate_cone(&cone, k + 1)?;

    // Split generators by the homogenizing coordinate and map back.
    let mut rep = GeneratorRep::default();
    for g in gens {
        let t = g[k];
        if t > PIVOT_TOL {
            let mut v = v0.clone();
            for (col, &ui) in basis.iter().zip(&g[..k]) {
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi += (ui / t) * ci;
                }
            }
            rep.vertices.push(v);
        } else {
            let mut r = vec![0.0; p.dim];
            for (col, &ui) in basis.iter().zip(&g[..k]) {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri += ui * ci;
                }
            }
            normalize_inf(&mut r);
            if r.iter().any(|&c| c != 0.0) {
                rep.rays.push(r);
            }
        }
    }
    Ok(rep)
}

fn identity_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect()
}

fn normalize_inf(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()));
    if m > 0.0 {
        for c in v.iter_mut() {
            *c /= m;
        }
    }
}

/// All extreme rays of the (possibly non-pointed) cone `{x | rows·x ≤ 0}`
/// in dimension `n`. Lineality directions are returned as opposite ray
/// pairs. Rows are inserted in their given (lexicographic) order.
fn enumerate_cone(rows: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>, PolyError> {
    // Factor out the lineality space first so the DD cone is pointed.
    let lineality = linalg::null_space(rows, n, PIVOT_TOL);
    if !lineality.is_empty() {
        // Work in the orthogonal complement of the lineality space.
        let complement = linalg::null_space(&lineality, n, PIVOT_TOL);
        let projected: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| complement.iter().map(|w| linalg::dot(r, w)).collect())
            .collect();
        let inner = enumerate_cone_pointed(&projected, complement.len())?;
        let mut out = Vec::new();
        for g in inner {
            let mut x = vec![0.0; n];
            for (w, &gi) in complement.iter().zip(&g) {
                for (xi, wi) in x.iter_mut().zip(w) {
                    *xi += gi * wi;
                }
            }
            out.push(x);
        }
        for l in lineality {
            let mut pos = l.clone();
            normalize_inf(&mut pos);
            let neg: Vec<f64> = pos.iter().map(|&c| -c).collect();
            out.push(pos);
            out.push(neg);
        }
        return Ok(out);
    }
    enumerate_cone_pointed(rows, n)
}

/// Double description on a pointed cone with full-rank constraint matrix.
fn enumerate_cone_pointed(rows: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>, PolyError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    // Pick n linearly independent rows for the initial simplicial cone.
    let work: Vec<Vec<f64>> = rows.to_vec();
    let tagged: Vec<Vec<f64>> = work
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut t = r.clone();
            t.push(i as f64);
            t
        })
        .collect();
    // Row-reduce a copy to find independent row indices.
    let mut indep: Vec<usize> = Vec::new();
    {
        let mut m: Vec<Vec<f64>> = Vec::new();
        for t in &tagged {
            let cand = t[..n].to_vec();
            let mut trial = m.clone();
            trial.push(cand.clone());
            let mut reduced = trial.clone();
            let piv = linalg::row_reduce(&mut reduced, PIVOT_TOL);
            if piv.len() > m.len() {
                m.push(cand);
                indep.push(*t.last().unwrap() as usize);
            }
            if m.len() == n {
                break;
            }
        }
        if m.len() < n {
            // Should not happen for a pointed cone; treat as numerical issue.
            return Err(PolyError::GeneratorCap);
        }
    }
    let base: Vec<Vec<f64>> = indep.iter().map(|&i| work[i].clone()).collect();
    // Initial rays: columns of −B⁻¹ (so B·r_j = −e_j ≤ 0).
    let mut init_rays = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        let r = linalg::solve(&base, &e).ok_or(PolyError::GeneratorCap)?;
        let mut r = r;
        normalize_inf(&mut r);
        init_rays.push(r);
    }

    let mut rays = init_rays;
    let mut inserted: Vec<Vec<f64>> = base.clone();
    // Insert the remaining rows in order.
    let remaining: Vec<usize> = (0..work.len()).filter(|i| !indep.contains(i)).collect();
    for idx in remaining {
        let a = work[idx].clone();
        let sign: Vec<f64> = rays.iter().map(|r| linalg::dot(&a, r)).collect();
        let mut keep: Vec<Vec<f64>> = Vec::new();
        let mut pos: Vec<usize> = Vec::new();
        let mut neg: Vec<usize> = Vec::new();
        for (i, &s) in sign.iter().enumerate() {
            if s < -PIVOT_TOL {
                neg.push(i);
                keep.push(rays[i].clone());
            } else if s <= PIVOT_TOL {
                keep.push(rays[i].clone());
            } else {
                pos.push(i);
            }
        }
        if pos.is_empty() {
            continue; // row is redundant for the current cone
        }
        for &ip in &pos {
            for &im in &neg {
                if !adjacent(&inserted, &rays, ip, im, n) {
                    continue;
                }
                let (p_ray, m_ray) = (&rays[ip], &rays[im]);
                let (sp, sm) = (sign[ip], sign[im]);
                let mut new_ray: Vec<f64> = p_ray
                    .iter()
                    .zip(m_ray)
                    .map(|(&pc, &mc)| sp * mc - sm * pc)
                    .collect();
                normalize_inf(&mut new_ray);
                keep.push(new_ray);
                if keep.len() > MAX_GENERATORS {
                    return Err(PolyError::GeneratorCap);
                }
            }
        }
        rays = keep;
        inserted.push(a);
    }
    Ok(rays)
}

/// Rank-based adjacency: two extreme rays of a pointed cone in ℝⁿ are
/// adjacent iff the constraints active at both span a space of rank n − 2.
fn adjacent(inserted: &[Vec<f64>], rays: &[Vec<f64>], ip: usize, im: usize, n: usize) -> bool {
    if n <= 2 {
        return true;
    }
    let mut active: Vec<Vec<f64>> = Vec::new();
    for row in inserted {
        if linalg::dot(row, &rays[ip]).abs() <= PIVOT_TOL
            && linalg::dot(row, &rays[im]).abs() <= PIVOT_TOL
        {
            active.push(row.clone());
        }
    }
    let mut m = active;
    let pivots = linalg::row_reduce(&mut m, PIVOT_TOL);
    pivots.len() >= n - 2
}

/// Farkas encoding of the entailment `P ⊆ {v | c(λ)·v ≤ d(λ)}` where the
/// coefficient expressions may mention template unknowns λ.
#[derive(Clone, Debug)]
pub struct FarkasEncoding {
    /// Indices of the fresh multiplier variables (to be constrained ≥ 0).
    pub multipliers: Vec<usize>,
    /// `yᵀA − c = 0`, one expression per space dimension.
    pub eqs: Vec<LinExpr>,
    /// `yᵀb − d ≤ 0`.
    pub ineq: LinExpr,
}

impl FarkasEncoding {
    /// Adds the encoding to a linear program, including `y ≥ 0` bounds.
    pub fn install(&self, lp: &mut LinearProgram) {
        for e in &self.eqs {
            lp.add_eq(e.clone());
        }
        lp.add_le(self.ineq.clone());
        for &m in &self.multipliers {
            lp.set_bounds(m, 0.0, f64::INFINITY);
        }
    }
}

/// Encodes `∀v ⊨ P: c(λ)·v ≤ d(λ)` by Farkas' lemma. Sound and complete
/// for nonempty `P`; the caller is responsible for establishing
/// nonemptiness (an empty `P` makes the entailment vacuous but the
/// encoding still demands a certificate).
pub fn farkas_encode(
    p: &Polyhedron,
    c: &[LinExpr],
    d: &LinExpr,
    pool: &mut VarPool,
) -> FarkasEncoding {
    debug_assert_eq!(c.len(), p.dim);
    let multipliers: Vec<usize> =
        (0..p.rows.len()).map(|i| pool.fresh(format!("y{i}"))).collect();
    let mut eqs = Vec::with_capacity(p.dim);
    for k in 0..p.dim {
        let mut e = c[k].scaled(-1.0);
        for (&m, (a, _)) in multipliers.iter().zip(&p.rows) {
            e.add_term(m, a[k]);
        }
        eqs.push(e);
    }
    let mut ineq = d.scaled(-1.0);
    for (&m, (_, b)) in multipliers.iter().zip(&p.rows) {
        ineq.add_term(m, *b);
    }
    FarkasEncoding { multipliers, eqs, ineq }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{solve_lp, LinearProgram, Sense};

    fn poly(rows: &[(&[f64], f64)]) -> Polyhedron {
        let dim = rows[0].0.len();
        Polyhedron { dim, rows: rows.iter().map(|(a, b)| (a.to_vec(), *b)).collect() }
    }

    fn has_vertex(rep: &GeneratorRep, v: &[f64]) -> bool {
        rep.vertices
            .iter()
            .any(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-7))
    }

    fn has_ray(rep: &GeneratorRep, r: &[f64]) -> bool {
        rep.rays.iter().any(|w| {
            // compare up to positive scaling (rays are ∞-normalized)
            let mut scaled = r.to_vec();
            normalize_inf(&mut scaled);
            w.iter().zip(&scaled).all(|(a, b)| (a - b).abs() < 1e-7)
        })
    }

    #[test]
    fn emptiness_checks() {
        let p = poly(&[(&[1.0], 0.0), (&[-1.0], -1.0)]); // x ≤ 0 ∧ x ≥ 1
        assert!(is_empty(&p).unwrap());
        let q = poly(&[(&[1.0], 5.0)]);
        assert!(!is_empty(&q).unwrap());
        // Shared boundary only: open-interior check reports empty.
        let touching = poly(&[(&[1.0], 0.0), (&[-1.0], 0.0)]); // {0}
        assert!(!is_empty(&touching).unwrap());
        assert!(is_empty_interior(&touching, 1e-9).unwrap());
    }

    #[test]
    fn decompose_unit_square() {
        let p = poly(&[
            (&[1.0, 0.0], 1.0),
            (&[-1.0, 0.0], 0.0),
            (&[0.0, 1.0], 1.0),
            (&[0.0, -1.0], 0.0),
        ]);
        let rep = decompose(&p).unwrap();
        assert_eq!(rep.vertices.len(), 4);
        assert!(rep.rays.is_empty());
        for v in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            assert!(has_vertex(&rep, &v), "missing vertex {v:?} in {rep:?}");
        }
    }

    #[test]
    fn decompose_quadrant_corner() {
        // x ≤ 99 ∧ y ≤ 99: one vertex, two rays.
        let p = poly(&[(&[1.0, 0.0], 99.0), (&[0.0, 1.0], 99.0)]);
        let rep = decompose(&p).unwrap();
        assert_eq!(rep.vertices.len(), 1);
        assert!(has_vertex(&rep, &[99.0, 99.0]));
        assert_eq!(rep.rays.len(), 2);
        assert!(has_ray(&rep, &[-1.0, 0.0]));
        assert!(has_ray(&rep, &[0.0, -1.0]));
    }

    #[test]
    fn decompose_halfplane_has_lineality() {
        // x ≤ 99 in ℝ²: a line of direction (0,1) in the recession cone.
        let p = poly(&[(&[1.0, 0.0], 99.0)]);
        let rep = decompose(&p).unwrap();
        assert!(!rep.vertices.is_empty());
        assert!(has_ray(&rep, &[-1.0, 0.0]));
        assert!(has_ray(&rep, &[0.0, 1.0]));
        assert!(has_ray(&rep, &[0.0, -1.0]));
        // Every vertex lies on the bounding facet.
        for v in &rep.vertices {
            assert!((v[0] - 99.0).abs() < 1e-7);
        }
    }

    #[test]
    fn decompose_point_with_implicit_equalities() {
        // x ≤ 1 ∧ x ≥ 1 ∧ y ≤ 2 ∧ y ≥ 2 → single point (1,2).
        let p = poly(&[
            (&[1.0, 0.0], 1.0),
            (&[-1.0, 0.0], -1.0),
            (&[0.0, 1.0], 2.0),
            (&[0.0, -1.0], -2.0),
        ]);
        let rep = decompose(&p).unwrap();
        assert_eq!(rep.vertices.len(), 1);
        assert!(has_vertex(&rep, &[1.0, 2.0]));
        assert!(rep.rays.is_empty());
    }

    #[test]
    fn decompose_triangle_with_redundant_row() {
        let p = poly(&[
            (&[-1.0, 0.0], 0.0),
            (&[0.0, -1.0], 0.0),
            (&[1.0, 1.0], 2.0),
            (&[1.0, 1.0], 5.0), // redundant
        ]);
        let rep = decompose(&p).unwrap();
        assert_eq!(rep.vertices.len(), 3);
        assert!(has_vertex(&rep, &[0.0, 0.0]));
        assert!(has_vertex(&rep, &[2.0, 0.0]));
        assert!(has_vertex(&rep, &[0.0, 2.0]));
    }

    /// Farkas encoding agrees with direct LP entailment on numeric data.
    #[test]
    fn farkas_matches_lp_entailment() {
        let p = poly(&[(&[1.0, 0.0], 2.0), (&[0.0, 1.0], 3.0), (&[-1.0, -1.0], 0.0)]);
        // c·v ≤ d candidates: (x + y ≤ 5) holds; (x + y ≤ 4.9) fails.
        for (d_val, expect) in [(5.0, true), (4.9, false)] {
            let mut pool = VarPool::new();
            let c = vec![LinExpr::constant(1.0), LinExpr::constant(1.0)];
            let d = LinExpr::constant(d_val);
            let enc = farkas_encode(&p, &c, &d, &mut pool);
            let mut lp =
                LinearProgram::new(pool.len(), Sense::Min, LinExpr::constant(0.0));
            enc.install(&mut lp);
            let sol = solve_lp(&lp).unwrap();
            assert_eq!(sol.status == LpStatus::Optimal, expect, "d = {d_val}");
        }
    }
}
