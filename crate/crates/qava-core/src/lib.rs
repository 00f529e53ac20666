//! Quantitative assertion-violation analysis for probabilistic programs.
//!
//! The library models probabilistic programs as probabilistic transition
//! systems (PTS), and derives certified bounds on the probability that an
//! assertion is ever violated:
//!
//! * [`hoeffding`] — upper bounds from repulsing ranking supermartingales
//!   combined with Hoeffding's lemma,
//! * [`explinsyn`] — upper bounds from exponential templates over affine
//!   expressions, solved as a convex program,
//! * [`explowsyn`] — lower bounds from the same templates via a Jensen
//!   strengthening, solved as a single linear program.
//!
//! Supporting infrastructure: a brace-language [`frontend`], closed
//! [`polyhedra`] with double-description decomposition and Farkas encoding,
//! in-house LP and convex [`solvers`], and a ground-truth [`oracle`]
//! (exact value iteration on integer grids plus Monte Carlo simulation).
//!
//! All bounds are tracked in log space: violation probabilities span
//! hundreds of orders of magnitude, so the natural log of the bound is the
//! primary quantity and decimal renderings are derived from it.

pub mod corpus;
pub mod explinsyn;
pub mod explowsyn;
pub mod frontend;
pub mod hoeffding;
pub mod oracle;
pub mod polyhedra;
pub mod pts;
pub mod solvers;


