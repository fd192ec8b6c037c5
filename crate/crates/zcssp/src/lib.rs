//! Feasibility seeking with perturbed sequential subgradient projections.
//!
//! This crate solves convex feasibility problems whose constraint sets are
//! given as zero-level sets of *zero-convex* functions: functions `g` that
//! admit, at every point `y`, a vector `t` with
//!
//! ```text
//! g(y) + <t, x - y> <= 0    for every x with g(x) <= 0.
//! ```
//!
//! Such a `t` is called a 0-subgradient of `g` at `y`. The class is strictly
//! larger than the convex functions (it contains every function with a convex
//! zero-level set, discontinuous and nonconvex examples included), yet it is
//! exactly what a subgradient projection step needs: moving from `y` against
//! `t` by `g(y) / ||t||^2` lands on a hyperplane separating `y` from the
//! constraint set.
//!
//! The solver processes one constraint per iteration. Given functions `g_j`,
//! a box `omega`, and a start `x_0`, it repeats
//!
//! ```text
//! x_{n+1} = P_omega( x_n - lambda_n * g_i(n)(x_n) / ||t_n||^2 * t_n + b_n )
//! ```
//!
//! whenever `g_i(n)(x_n) > 0` and leaves `x_n` unchanged otherwise. Here
//! `i(n)` is a cyclic, almost-cyclic random, or fully random control
//! sequence, `lambda_n` is a relaxation parameter in `[eps1, 2 - eps2]`, and
//! `b_n` is an optional perturbation whose magnitude obeys an adaptive bound
//! that preserves convergence. The iteration is Fejer monotone with respect
//! to the feasible set, and the crate can check the per-step decrease
//! inequality as a runtime invariant.
//!
//! # Modules
//!
//! * [`linalg`]: dense vectors and orthogonal projections onto boxes,
//!   hyperplanes, and balls. Generic over the floating-point scalar.
//! * [`zero_convex`]: the oracle abstraction (evaluation plus 0-subgradient
//!   selection), constructive selection rules, a calculus for combining
//!   oracles, and sampling-based verification of the defining inequality.
//! * [`voronoi`]: concrete zero-convex families: half-space functions,
//!   Voronoi cell functions, additively weighted (ball-shifted) Voronoi
//!   functions, ball constraints, and a nonconvex bivariate polynomial.
//! * [`solver`]: the perturbed sequential subgradient projection engine:
//!   controls, relaxation schedules, adaptive perturbations, Fejer checks,
//!   the inner-perturbation reformulation, and approximate minimization.
//!
//! The solver layers work in 64-bit floating point; the type aliases at the
//! crate root fix the scalar so downstream code does not repeat the
//! parameter.

pub mod linalg;
pub mod solver;
pub mod voronoi;
pub mod zero_convex;

/// Dense `f64` coordinate vector; the ambient space element everywhere above
/// the linear-algebra layer.
pub type Vector = linalg::Vector<f64>;

/// Axis-aligned `f64` box, the region `omega` the solver projects onto.
pub type BoxRegion = linalg::BoxRegion<f64>;

/// Hyperplane in `f64` coordinates, anchored at a point with a unit normal.
pub type Hyperplane = linalg::Hyperplane<f64>;

/// Closed `f64` ball given by center and radius.
pub type Ball = linalg::Ball<f64>;
