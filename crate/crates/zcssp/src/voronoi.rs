//! Concrete zero-convex function families built from distance geometry:
//! half-space offsets, Voronoi cell functions, additively weighted
//! (ball-shifted) Voronoi functions, ball constraints, plain distance
//! objectives, and a nonconvex bivariate polynomial.
//!
//! The common pattern: each family's zero-level set is a simple convex set
//! (a half-space, a Voronoi cell, one sheet of a hyperboloid's inside, a
//! ball), and each family selects its 0-subgradient from an explicit
//! separating hyperplane. The Voronoi families use the selection
//!
//! ```text
//! t = g(y) * (a - p) / <y - (a + p)/2, a - p>
//! ```
//!
//! where `p` is the cell's own site and `a` the nearest competing site to
//! `y`; the denominator is positive exactly when `y` is strictly closer to
//! `a` than to `p`, which is implied by `g(y) > 0`. With the nearest site
//! the selection norm never exceeds 2, giving the uniform bound the
//! solver's perturbation theory needs.
//!
//! All evaluation points with `g(y) <= 0` (boundary included) yield the
//! zero selection.

use thiserror::Error;

use crate::linalg::{dist, dot, norm, project_ball, scale, sub};
use crate::zero_convex::{SublevelProjector, UniformBoundCertificate, ZeroConvexOracle};
use crate::{Ball, Vector};

/// Construction errors for the geometric families.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VoronoiError {
    /// Half-space and Voronoi constructions need two distinct sites.
    #[error("own site and competing site coincide")]
    CoincidentSites,
    /// A Voronoi function needs at least one competing site.
    #[error("competing site list must be nonempty")]
    EmptySites,
    /// All sites must live in one ambient dimension.
    #[error("sites disagree on dimension: {left} vs {right}")]
    MixedDimensions {
        /// Dimension of the own site.
        left: usize,
        /// Dimension of the offending site.
        right: usize,
    },
    /// The additive weight gap must leave the shifted ball clear of the own
    /// site: `0 <= shift < ||a - p||`.
    #[error("ball shift {shift} is not in [0, {distance}) set by the site distance")]
    InvalidShift {
        /// The rejected shift.
        shift: f64,
        /// Distance between the two sites.
        distance: f64,
    },
    /// Ball constraints need a positive radius.
    #[error("ball constraint radius must be positive, got {rho}")]
    NonPositiveRadius {
        /// The rejected radius.
        rho: f64,
    },
}

/// Signed offset from the bisector between two sites.
///
/// For an own site `p` and a competing site `a`,
///
/// ```text
/// g(x) = <x - (a + p)/2, (a - p)/||a - p||>,
/// ```
///
/// whose zero-level set is the half-space of points at least as close to
/// `p` as to `a`. The selection on active points is the unit normal
/// `(a - p)/||a - p||`, which is also what the general Voronoi selection
/// reduces to for a single competing site.
#[derive(Debug, Clone)]
pub struct HalfSpaceFunction {
    midpoint: Vector,
    unit_normal: Vector,
    label: String,
}

impl HalfSpaceFunction {
    /// Builds the bisector offset function for sites `p` and `a`.
    ///
    /// # Errors
    ///
    /// [`VoronoiError::MixedDimensions`] when the sites disagree on
    /// dimension, [`VoronoiError::CoincidentSites`] when `p == a`.
    pub fn new(p: Vector, a: Vector) -> Result<Self, VoronoiError> {
        if p.dim() != a.dim() {
            return Err(VoronoiError::MixedDimensions {
                left: p.dim(),
                right: a.dim(),
            });
        }
        let direction = sub(&a, &p);
        let len = norm(&direction);
        if len == 0.0 {
            return Err(VoronoiError::CoincidentSites);
        }
        let unit_normal = scale(direction, 1.0 / len);
        let midpoint = scale(crate::linalg::axpy(1.0, &a, &p), 0.5);
        Ok(Self {
            midpoint,
            unit_normal,
            label: "halfspace".to_string(),
        })
    }

    /// Replaces the default label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The asserted selection-norm bound: active selections are unit
    /// vectors.
    pub fn certificate(&self) -> UniformBoundCertificate {
        UniformBoundCertificate::new(1.0, "all points")
    }
}

impl ZeroConvexOracle for HalfSpaceFunction {
    fn dim(&self) -> usize {
        self.midpoint.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        dot(&sub(x, &self.midpoint), &self.unit_normal)
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        if self.eval(y) <= 0.0 {
            Vector::zeros(self.dim())
        } else {
            self.unit_normal.clone()
        }
    }

    fn label(&self) -> &str {
        &self.label
    }
}

impl SublevelProjector for HalfSpaceFunction {
    fn project_to_sublevel(&self, y: &Vector, level: f64) -> Vector {
        let excess = self.eval(y) - level;
        if excess <= 0.0 {
            y.clone()
        } else {
            crate::linalg::axpy(-excess, &self.unit_normal, y)
        }
    }
}

/// Distance advantage of the own site over the nearest competitor.
///
/// For an own site `p` and a finite competing set `A`,
///
/// ```text
/// g(x) = d(x, p) - d(x, A),
/// ```
///
/// whose zero-level set is the Voronoi cell of `p`: the points at least as
/// close to `p` as to everything in `A`. The cell is an intersection of
/// half-spaces and hence convex, even though `g` itself is not convex and
/// not even quasiconvex once `A` has a curved influence.
#[derive(Debug, Clone)]
pub struct VoronoiFunction {
    p: Vector,
    sites: Vec<Vector>,
    label: String,
}

impl VoronoiFunction {
    /// Builds the cell function for own site `p` against competitors
    /// `sites`.
    ///
    /// # Errors
    ///
    /// [`VoronoiError::EmptySites`] for an empty competitor list,
    /// [`VoronoiError::MixedDimensions`] on inconsistent dimensions, and
    /// [`VoronoiError::CoincidentSites`] if `p` itself appears among the
    /// competitors (the cell function needs `d(p, A) > 0`).
    pub fn new(p: Vector, sites: Vec<Vector>) -> Result<Self, VoronoiError> {
        if sites.is_empty() {
            return Err(VoronoiError::EmptySites);
        }
        for a in &sites {
            if a.dim() != p.dim() {
                return Err(VoronoiError::MixedDimensions {
                    left: p.dim(),
                    right: a.dim(),
                });
            }
            if dist(a, &p) == 0.0 {
                return Err(VoronoiError::CoincidentSites);
            }
        }
        Ok(Self {
            p,
            sites,
            label: "voronoi".to_string(),
        })
    }

    /// Replaces the default label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Index of the competing site nearest to `y`, ties to the lowest
    /// index.
    fn nearest(&self, y: &Vector) -> usize {
        let mut best = (0usize, dist(y, &self.sites[0]));
        for (index, a) in self.sites.iter().enumerate().skip(1) {
            let d = dist(y, a);
            if d < best.1 {
                best = (index, d);
            }
        }
        best.0
    }

    /// The asserted selection-norm bound for nearest-site selections.
    pub fn certificate(&self) -> UniformBoundCertificate {
        UniformBoundCertificate::new(2.0, "active points, nearest-site selection")
    }
}

impl ZeroConvexOracle for VoronoiFunction {
    fn dim(&self) -> usize {
        self.p.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        let nearest = self
            .sites
            .iter()
            .map(|a| dist(x, a))
            .fold(f64::INFINITY, f64::min);
        dist(x, &self.p) - nearest
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let g_at_y = self.eval(y);
        if g_at_y <= 0.0 {
            return Vector::zeros(self.dim());
        }
        let a = &self.sites[self.nearest(y)];
        bisector_selection(g_at_y, y, &self.p, a)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// The shared bisector selection `t = g(y)(a - p) / <y - (a+p)/2, a - p>`.
///
/// Valid whenever `y` is strictly closer to `a` than to `p` and the
/// bisector of `p` and `a` separates `y` from the level set; with `a` the
/// nearest site this point sits at distance at least `g(y)/2` from the
/// plane, which caps the selection norm at 2.
///
/// In exact arithmetic the denominator equals
/// `(d(y,p) - d(y,a)) * (d(y,p) + d(y,a)) / 2` and so is positive at every
/// active point. When `y` sits on the bisector to rounding error, the
/// evaluated `g(y)` can be a positive rounding residue while the inner
/// product rounds to zero or below; in that regime the selection falls
/// back to its well-conditioned limit `2(a - p) / (d(y,p) + d(y,a))`,
/// which stays a valid selection with the same norm cap.
fn bisector_selection(g_at_y: f64, y: &Vector, p: &Vector, a: &Vector) -> Vector {
    let direction = sub(a, p);
    let midpoint = scale(crate::linalg::axpy(1.0, a, p), 0.5);
    let denom = dot(&sub(y, &midpoint), &direction);
    if denom > 0.0 {
        return scale(direction, g_at_y / denom);
    }
    let spread = dist(y, p) + dist(y, a);
    debug_assert!(spread > 0.0, "distinct p and a give a positive spread");
    scale(direction, 2.0 / spread)
}

/// Distance advantage against a competitor inflated to a ball.
///
/// For an own site `p`, a competing site `a`, and an additive weight gap
/// `shift >= 0`,
///
/// ```text
/// g(x) = d(x, p) - d(x, B),    B = closed ball of radius `shift` at `a`,
/// ```
///
/// with `d(x, B) = max(||x - a|| - shift, 0)`. The zero-level set is the
/// additively weighted Voronoi cell of `p` against `a`; its boundary is one
/// sheet of a hyperboloid with foci `p` and `a`, degenerating to the plain
/// bisector when `shift == 0`. Convexity of the cell needs the invariant
/// `shift < ||a - p||`, which the constructor enforces.
///
/// The selection replaces `a` by the point of `B` nearest to `y` (or by `y`
/// itself when `y` is inside `B`) and then applies the bisector rule; the
/// replacement function bounds `g` from below with equality at `y`, so its
/// selection transfers.
#[derive(Debug, Clone)]
pub struct BallShiftedVoronoiFunction {
    p: Vector,
    a: Vector,
    shift: f64,
    label: String,
}

impl BallShiftedVoronoiFunction {
    /// Builds the weighted cell function for own site `p` against the ball
    /// of radius `shift` around `a`.
    ///
    /// # Errors
    ///
    /// [`VoronoiError::MixedDimensions`] on inconsistent dimensions and
    /// [`VoronoiError::InvalidShift`] unless `0 <= shift < ||a - p||`.
    pub fn new(p: Vector, a: Vector, shift: f64) -> Result<Self, VoronoiError> {
        if p.dim() != a.dim() {
            return Err(VoronoiError::MixedDimensions {
                left: p.dim(),
                right: a.dim(),
            });
        }
        let distance = dist(&a, &p);
        if !(shift >= 0.0 && shift < distance) {
            return Err(VoronoiError::InvalidShift { shift, distance });
        }
        Ok(Self {
            p,
            a,
            shift,
            label: "ballshift".to_string(),
        })
    }

    /// Replaces the default label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The competing site.
    pub fn competing_site(&self) -> &Vector {
        &self.a
    }

    /// The asserted selection-norm bound.
    pub fn certificate(&self) -> UniformBoundCertificate {
        UniformBoundCertificate::new(2.0, "active points, nearest-point selection")
    }
}

impl ZeroConvexOracle for BallShiftedVoronoiFunction {
    fn dim(&self) -> usize {
        self.p.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        dist(x, &self.p) - (dist(x, &self.a) - self.shift).max(0.0)
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let g_at_y = self.eval(y);
        if g_at_y <= 0.0 {
            return Vector::zeros(self.dim());
        }
        let d_ya = dist(y, &self.a);
        if d_ya > self.shift {
            // Nearest point of the ball to y, on the segment from a to y.
            let effective = crate::linalg::axpy(
                self.shift / d_ya,
                &sub(y, &self.a),
                &self.a,
            );
            bisector_selection(g_at_y, y, &self.p, &effective)
        } else {
            // y is inside the ball, so d(y, B) = 0 and g(y) = ||y - p||.
            // The effective site collapses to y itself; the bisector rule
            // then reads t = g(y)(y - p) / (||y - p||^2 / 2), a vector of
            // norm exactly 2.
            let direction = sub(y, &self.p);
            scale(direction, 2.0 / g_at_y)
        }
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Distance to a center, offset by a radius.
///
/// `g(x) = ||x - center|| - rho`, whose zero-level set is the closed ball
/// of radius `rho`. Convex, differentiable away from the center, and the
/// gradient `(y - center)/||y - center||` is the selection on active
/// points.
#[derive(Debug, Clone)]
pub struct BallConstraintFunction {
    center: Vector,
    rho: f64,
    label: String,
}

impl BallConstraintFunction {
    /// Builds the ball constraint of radius `rho` around `center`.
    ///
    /// # Errors
    ///
    /// [`VoronoiError::NonPositiveRadius`] unless `rho > 0`.
    pub fn new(center: Vector, rho: f64) -> Result<Self, VoronoiError> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(VoronoiError::NonPositiveRadius { rho });
        }
        Ok(Self {
            center,
            rho,
            label: "ball".to_string(),
        })
    }

    /// Replaces the default label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The asserted selection-norm bound: active selections are unit
    /// vectors.
    pub fn certificate(&self) -> UniformBoundCertificate {
        UniformBoundCertificate::new(1.0, "all points")
    }
}

impl ZeroConvexOracle for BallConstraintFunction {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        dist(x, &self.center) - self.rho
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let g_at_y = self.eval(y);
        if g_at_y <= 0.0 {
            return Vector::zeros(self.dim());
        }
        // g > 0 puts y at distance g + rho > 0 from the center.
        let offset = sub(y, &self.center);
        scale(offset, 1.0 / (g_at_y + self.rho))
    }

    fn label(&self) -> &str {
        &self.label
    }
}

impl SublevelProjector for BallConstraintFunction {
    /// # Panics
    ///
    /// Panics when `rho + level < 0`: the sublevel set is empty.
    fn project_to_sublevel(&self, y: &Vector, level: f64) -> Vector {
        let radius = self.rho + level;
        assert!(radius >= 0.0, "empty sublevel set at level {level}");
        let ball = Ball::new(self.center.clone(), radius)
            .expect("nonnegative radius was just checked");
        project_ball(y, &ball)
    }
}

/// Plain distance to a point: `f(x) = ||x - center||`.
///
/// Useful as an objective for approximate minimization; its sublevel sets
/// are balls, so the shifted constraint `f - alpha` gets exact level-set
/// projections.
#[derive(Debug, Clone)]
pub struct PointDistanceFunction {
    center: Vector,
    label: String,
}

impl PointDistanceFunction {
    /// Builds the distance function to `center`.
    pub fn new(center: Vector) -> Self {
        Self {
            center,
            label: "dist".to_string(),
        }
    }

    /// Replaces the default label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The asserted selection-norm bound: active selections are unit
    /// vectors.
    pub fn certificate(&self) -> UniformBoundCertificate {
        UniformBoundCertificate::new(1.0, "all points")
    }
}

impl ZeroConvexOracle for PointDistanceFunction {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        dist(x, &self.center)
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let g_at_y = self.eval(y);
        if g_at_y <= 0.0 {
            return Vector::zeros(self.dim());
        }
        scale(sub(y, &self.center), 1.0 / g_at_y)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

impl SublevelProjector for PointDistanceFunction {
    /// # Panics
    ///
    /// Panics when `level < 0`: the sublevel set is empty.
    fn project_to_sublevel(&self, y: &Vector, level: f64) -> Vector {
        assert!(level >= 0.0, "empty sublevel set at level {level}");
        let ball = Ball::new(self.center.clone(), level)
            .expect("nonnegative radius was just checked");
        project_ball(y, &ball)
    }
}

/// A nonconvex bivariate polynomial with a convex zero-level set:
///
/// ```text
/// g(x1, x2) = x1^2 + x2^2 - x1^4 x2^4 + x1^6 x2^6 / 4 - 0.3.
/// ```
///
/// On the open disk of radius 0.7 the Hessian is positive semidefinite, so
/// the ordinary gradient is a valid selection there. The zero-level set
/// sits inside the closed disk of radius 0.6; outside the 0.7 disk the
/// sphere of radius 0.6 separates `y` from the level set, and projecting
/// onto it gives the selection `t = g(y) / (||y|| (||y|| - 0.6)) * y`.
#[derive(Debug, Clone, Default)]
pub struct PolynomialExampleFunction {
    _private: (),
}

impl PolynomialExampleFunction {
    /// Builds the fixed two-dimensional example function.
    pub fn new() -> Self {
        Self::default()
    }
}

impl ZeroConvexOracle for PolynomialExampleFunction {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &Vector) -> f64 {
        assert_eq!(x.dim(), 2, "dimension mismatch");
        let (x1, x2) = (x[0], x[1]);
        let (x1_2, x2_2) = (x1 * x1, x2 * x2);
        let m4 = x1_2 * x1_2 * x2_2 * x2_2;
        x1_2 + x2_2 - m4 + m4 * x1_2 * x2_2 / 4.0 - 0.3
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        assert_eq!(y.dim(), 2, "dimension mismatch");
        let g_at_y = self.eval(y);
        if g_at_y <= 0.0 {
            return Vector::zeros(2);
        }
        let (y1, y2) = (y[0], y[1]);
        let len = norm(y);
        if len < 0.7 {
            let grad = vec![
                2.0 * y1 - 4.0 * y1.powi(3) * y2.powi(4) + 1.5 * y1.powi(5) * y2.powi(6),
                2.0 * y2 - 4.0 * y2.powi(3) * y1.powi(4) + 1.5 * y2.powi(5) * y1.powi(6),
            ];
            Vector::new(grad).expect("gradient of a polynomial at a finite point is finite")
        } else {
            scale(y.clone(), g_at_y / (len * (len - 0.6)))
        }
    }

    fn label(&self) -> &str {
        "poly2d"
    }
}
