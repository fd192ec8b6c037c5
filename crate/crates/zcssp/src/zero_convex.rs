//! Zero-convex oracles: evaluation plus 0-subgradient selection, the
//! constructive selection rules, a calculus for combining oracles, and
//! sampling-based verification of the defining inequality.
//!
//! A vector `t` is a *0-subgradient* of `g` at `y` when
//!
//! ```text
//! g(y) + <t, x - y> <= 0    for every x with g(x) <= 0,
//! ```
//!
//! and `g` is *zero-convex* at `y` when such a `t` exists. The inequality
//! only quantifies over the zero-level set `{x : g(x) <= 0}`, so the class
//! is much larger than the convex functions: any function whose zero-level
//! set is convex qualifies, continuity not required. Two constructive rules
//! cover every family this crate ships:
//!
//! * [`subgrad_from_hyperplane`]: if `m` is the orthogonal projection of `y`
//!   onto any hyperplane separating `y` from the level set, then
//!   `t = g(y) / ||y - m||^2 * (y - m)` is a 0-subgradient.
//! * [`subgrad_from_levelset_projection`]: the same formula with `m` the
//!   orthogonal projection of `y` onto the level set itself.
//!
//! At points with `g(y) <= 0` the zero vector is always a valid selection,
//! and every oracle here returns it there. Conversely, when `g(y) > 0` and
//! the level set is nonempty, no valid selection can be zero; the solver
//! treats a zero selection on an active point as a hard error.
//!
//! Verification is by sampling: [`verify_zero_convexity`] evaluates the
//! defining inequality on a grid of (test point, level-set sample) pairs and
//! reports the worst violation. The quantifier over the full level set is
//! not finitely checkable, so this is a falsifier, not a proof.

use thiserror::Error;

use crate::linalg::{axpy, norm, norm_sq, sub};
use crate::Vector;

/// Grid on which [`compose_psi`] spot-checks the sign property of `psi`.
const PSI_SIGN_GRID: [f64; 7] = [-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0];

/// Errors from the constructive rules and oracle combinators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroConvexError {
    /// The separator projection coincides with the evaluation point.
    #[error("degenerate separating hyperplane")]
    DegenerateSeparatingHyperplane,
    /// The level-set projection coincides with the evaluation point.
    #[error("point already in level set")]
    PointAlreadyInLevelSet,
    /// Scaling factors must be nonnegative.
    #[error("scale factor must be nonnegative, got {alpha}")]
    NegativeScale {
        /// The rejected factor.
        alpha: f64,
    },
    /// A max envelope needs at least one member.
    #[error("max envelope over an empty oracle list")]
    EmptyEnvelope,
    /// Envelope members must share one ambient dimension.
    #[error("envelope members disagree on dimension: {left} vs {right}")]
    MixedDimensions {
        /// Dimension of the first member.
        left: usize,
        /// Dimension of the offending member.
        right: usize,
    },
    /// `psi` failed the sign spot-check `psi(r) <= 0 iff r <= 0`.
    #[error("psi violates the sign property at r = {r}: psi(r) = {value}")]
    PsiSignViolation {
        /// Grid point where the property failed.
        r: f64,
        /// Value of `psi` there.
        value: f64,
    },
}

/// A constraint function together with a 0-subgradient selection.
///
/// `eval` is the function value `g(x)`; `zero_subgradient` returns one
/// vector `t` satisfying the defining inequality at `y`. The contract every
/// implementation in this crate follows:
///
/// * `zero_subgradient(y)` returns the zero vector whenever
///   `eval(y) <= 0` (always valid there);
/// * `zero_subgradient(y)` is nonzero whenever `eval(y) > 0` and the
///   zero-level set is nonempty (required for the projection step to be
///   defined).
///
/// Oracles are immutable after construction; both calls are pure, hence the
/// `Send + Sync` supertraits.
pub trait ZeroConvexOracle: Send + Sync {
    /// Ambient dimension of the function's domain.
    fn dim(&self) -> usize;

    /// The function value `g(x)`.
    fn eval(&self, x: &Vector) -> f64;

    /// A selected 0-subgradient of `g` at `y`.
    fn zero_subgradient(&self, y: &Vector) -> Vector;

    /// Short human-readable identifier for reports and error messages.
    fn label(&self) -> &str;
}

impl<O: ZeroConvexOracle + ?Sized> ZeroConvexOracle for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        (**self).eval(x)
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        (**self).zero_subgradient(y)
    }

    fn label(&self) -> &str {
        (**self).label()
    }
}

impl<O: ZeroConvexOracle + ?Sized> ZeroConvexOracle for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        (**self).eval(x)
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        (**self).zero_subgradient(y)
    }

    fn label(&self) -> &str {
        (**self).label()
    }
}

/// Projection onto sublevel sets, for oracles that can compute it exactly.
///
/// [`shift_for_minimization`] turns an objective `f` into the constraint
/// `f - alpha`; its 0-subgradients come from the level-set projection rule,
/// which needs the orthogonal projection of a point onto
/// `{x : f(x) <= alpha}`. Function families with closed-form sublevel
/// projections (distances to points, balls, half-spaces) implement this
/// trait next to [`ZeroConvexOracle`].
pub trait SublevelProjector {
    /// Orthogonal projection of `y` onto `{x : f(x) <= level}`.
    ///
    /// # Panics
    ///
    /// Implementations may panic when the sublevel set is empty.
    fn project_to_sublevel(&self, y: &Vector, level: f64) -> Vector;
}

/// An asserted uniform bound on the norms of an oracle's selections.
///
/// The convergence theory requires the selected 0-subgradients to stay
/// bounded over the region the iterates visit. Such a bound is not
/// computable from the oracle interface alone, so the oracle author asserts
/// one as a certificate; [`admits`](Self::admits) checks individual
/// selections against it and the test suites check it empirically along
/// solver runs.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBoundCertificate {
    bound: f64,
    scope: String,
}

/// Slack allowed when checking a certificate, absorbing rounding in the
/// norm computation.
pub const CERTIFICATE_TOL: f64 = 1e-9;

impl UniformBoundCertificate {
    /// Asserts that all selections within `scope` have norm at most `bound`.
    ///
    /// # Panics
    ///
    /// Panics if `bound` is not a positive finite number.
    pub fn new(bound: f64, scope: impl Into<String>) -> Self {
        assert!(
            bound.is_finite() && bound > 0.0,
            "certificate bound must be positive and finite"
        );
        Self {
            bound,
            scope: scope.into(),
        }
    }

    /// The asserted bound `K`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Description of the point set over which the bound holds.
    pub fn scope(&self) -> &str {
        &self.scope
    }

    /// Whether a selection's norm respects the bound (with rounding slack).
    pub fn admits(&self, t: &Vector) -> bool {
        norm(t) <= self.bound + CERTIFICATE_TOL
    }
}

/// 0-subgradient from a separating hyperplane.
///
/// Let `m` be the orthogonal projection of `y` onto a hyperplane that
/// separates `y` from the zero-level set, and let `g_at_y = g(y) > 0`. Then
///
/// ```text
/// t = g_at_y / ||y - m||^2 * (y - m)
/// ```
///
/// is a 0-subgradient of `g` at `y`: for any `x` in the level set,
/// `<y - m, x - y>  <=  -||y - m||^2` because `x` and `y` lie on opposite
/// sides of the plane, so `g(y) + <t, x - y> <= g(y) - g_at_y = 0`.
///
/// # Errors
///
/// [`ZeroConvexError::DegenerateSeparatingHyperplane`] when `m_point == y`,
/// in which case no direction can be extracted.
pub fn subgrad_from_hyperplane(
    g_at_y: f64,
    y: &Vector,
    m_point: &Vector,
) -> Result<Vector, ZeroConvexError> {
    debug_assert!(g_at_y > 0.0, "separator rule only applies on active points");
    let gap = sub(y, m_point);
    let gap_sq = norm_sq(&gap);
    if gap_sq == 0.0 {
        return Err(ZeroConvexError::DegenerateSeparatingHyperplane);
    }
    Ok(crate::linalg::scale(gap, g_at_y / gap_sq))
}

/// 0-subgradient from the projection onto the level set itself.
///
/// The same formula as [`subgrad_from_hyperplane`], with `m` the orthogonal
/// projection `proj` of `y` onto `{x : g(x) <= 0}`. The hyperplane through
/// `proj` orthogonal to `y - proj` supports the level set, so the separator
/// argument applies verbatim.
///
/// # Errors
///
/// [`ZeroConvexError::PointAlreadyInLevelSet`] when `proj == y`, meaning the
/// point needs no projection step.
pub fn subgrad_from_levelset_projection(
    g_at_y: f64,
    y: &Vector,
    proj: &Vector,
) -> Result<Vector, ZeroConvexError> {
    debug_assert!(g_at_y > 0.0, "projection rule only applies on active points");
    let gap = sub(y, proj);
    let gap_sq = norm_sq(&gap);
    if gap_sq == 0.0 {
        return Err(ZeroConvexError::PointAlreadyInLevelSet);
    }
    Ok(crate::linalg::scale(gap, g_at_y / gap_sq))
}

/// The oracle `alpha * g`, built by [`scale_oracle`].
#[derive(Debug, Clone)]
pub struct Scaled<O> {
    inner: O,
    alpha: f64,
    label: String,
}

impl<O: ZeroConvexOracle> ZeroConvexOracle for Scaled<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.alpha * self.inner.eval(x)
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        crate::linalg::scale(self.inner.zero_subgradient(y), self.alpha)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Scales an oracle by a nonnegative factor.
///
/// If `t` is a 0-subgradient of `g` at `y`, then `alpha * t` is one of
/// `alpha * g`: the level set is unchanged for `alpha > 0` (the whole space
/// for `alpha == 0`), and the defining inequality scales through.
///
/// # Errors
///
/// [`ZeroConvexError::NegativeScale`] when `alpha < 0` or is NaN; negating
/// flips the inequality and destroys zero-convexity in general.
pub fn scale_oracle<O: ZeroConvexOracle>(g: O, alpha: f64) -> Result<Scaled<O>, ZeroConvexError> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(ZeroConvexError::NegativeScale { alpha });
    }
    let label = format!("{} * {}", alpha, g.label());
    Ok(Scaled {
        inner: g,
        alpha,
        label,
    })
}

/// The pointwise maximum of a family of oracles, built by [`max_envelope`].
#[derive(Debug, Clone)]
pub struct MaxEnvelope<O> {
    members: Vec<O>,
    label: String,
}

impl<O: ZeroConvexOracle> MaxEnvelope<O> {
    /// Index of the first member attaining the maximum at `x`.
    fn argmax(&self, x: &Vector) -> (usize, f64) {
        let mut best = (0, self.members[0].eval(x));
        for (index, member) in self.members.iter().enumerate().skip(1) {
            let value = member.eval(x);
            if value > best.1 {
                best = (index, value);
            }
        }
        best
    }
}

impl<O: ZeroConvexOracle> ZeroConvexOracle for MaxEnvelope<O> {
    fn dim(&self) -> usize {
        self.members[0].dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.argmax(x).1
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let (index, value) = self.argmax(y);
        if value <= 0.0 {
            return Vector::zeros(self.dim());
        }
        self.members[index].zero_subgradient(y)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// The pointwise maximum `max_i g_i`.
///
/// The level set of the maximum is the intersection of the members' level
/// sets, so a 0-subgradient of any member attaining the max at `y` is also
/// one of the envelope: the defining inequality for that member is only
/// strengthened by shrinking the set of admissible `x`. Ties break to the
/// lowest index, which keeps runs reproducible.
///
/// # Errors
///
/// [`ZeroConvexError::EmptyEnvelope`] for an empty list and
/// [`ZeroConvexError::MixedDimensions`] when members disagree on the
/// ambient dimension.
pub fn max_envelope<O: ZeroConvexOracle>(gs: Vec<O>) -> Result<MaxEnvelope<O>, ZeroConvexError> {
    let first_dim = match gs.first() {
        None => return Err(ZeroConvexError::EmptyEnvelope),
        Some(g) => g.dim(),
    };
    for g in &gs {
        if g.dim() != first_dim {
            return Err(ZeroConvexError::MixedDimensions {
                left: first_dim,
                right: g.dim(),
            });
        }
    }
    let label = format!(
        "max({})",
        gs.iter().map(O::label).collect::<Vec<_>>().join(", ")
    );
    Ok(MaxEnvelope {
        members: gs,
        label,
    })
}

/// The composition `psi(g(x))`, built by [`compose_psi`].
pub struct Composed<O, F> {
    inner: O,
    psi: F,
    label: String,
}

impl<O, F> ZeroConvexOracle for Composed<O, F>
where
    O: ZeroConvexOracle,
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        (self.psi)(self.inner.eval(x))
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let g_at_y = self.inner.eval(y);
        let value = (self.psi)(g_at_y);
        if value <= 0.0 {
            return Vector::zeros(self.dim());
        }
        // The sign property makes psi(g) share g's level set, so any
        // hyperplane separating y from it still separates. The inner
        // selection t gives one: m = y - g(y)/||t||^2 * t is the projection
        // of y onto { x : <t, x - m> = 0 }, and the defining inequality for
        // t places the level set on the far side. Rebuilding from m with the
        // composed value amounts to t_new = (psi(g(y))/g(y)) * t.
        let t = self.inner.zero_subgradient(y);
        let t_sq = norm_sq(&t);
        assert!(
            t_sq > 0.0,
            "oracle '{}' returned a zero selection on an active point",
            self.inner.label()
        );
        let m = axpy(-(g_at_y / t_sq), &t, y);
        subgrad_from_hyperplane(value, y, &m)
            .expect("separator point is distinct from y on active points")
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Composes an oracle with a sign-preserving scalar map.
///
/// If `psi(r) <= 0` exactly when `r <= 0`, then `psi . g` has the same
/// zero-level set as `g`, and a 0-subgradient for the composition follows
/// from the separator rule applied to the hyperplane certified by `g`'s own
/// selection.
///
/// The sign property is the caller's contract; it is spot-checked on the
/// grid `{-10, -1, -0.1, 0, 0.1, 1, 10}` to catch gross errors, not proven.
///
/// # Errors
///
/// [`ZeroConvexError::PsiSignViolation`] when the spot-check fails.
pub fn compose_psi<O, F>(g: O, psi: F) -> Result<Composed<O, F>, ZeroConvexError>
where
    O: ZeroConvexOracle,
    F: Fn(f64) -> f64 + Send + Sync,
{
    for r in PSI_SIGN_GRID {
        let value = psi(r);
        if (value <= 0.0) != (r <= 0.0) {
            return Err(ZeroConvexError::PsiSignViolation { r, value });
        }
    }
    let label = format!("psi({})", g.label());
    Ok(Composed {
        inner: g,
        psi,
        label,
    })
}

/// The constraint `f - alpha`, built by [`shift_for_minimization`].
#[derive(Debug, Clone)]
pub struct Shifted<O> {
    inner: O,
    alpha: f64,
    label: String,
}

impl<O> ZeroConvexOracle for Shifted<O>
where
    O: ZeroConvexOracle + SublevelProjector,
{
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.inner.eval(x) - self.alpha
    }

    fn zero_subgradient(&self, y: &Vector) -> Vector {
        let value = self.eval(y);
        if value <= 0.0 {
            return Vector::zeros(self.dim());
        }
        let proj = self.inner.project_to_sublevel(y, self.alpha);
        subgrad_from_levelset_projection(value, y, &proj)
            .expect("sublevel projection moves active points")
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Turns an objective into a constraint: the oracle for `f - alpha`.
///
/// The zero-level set of the result is the sublevel set
/// `{x : f(x) <= alpha}`; the selection comes from the level-set projection
/// rule, using the inner function's exact sublevel projection. Feeding the
/// result to the solver alongside ordinary constraints makes the final point
/// an approximate minimizer: it satisfies `f(x) <= alpha` up to the solver
/// tolerance.
pub fn shift_for_minimization<O>(f: O, alpha: f64) -> Shifted<O>
where
    O: ZeroConvexOracle + SublevelProjector,
{
    let label = format!("{} - {}", f.label(), alpha);
    Shifted {
        inner: f,
        alpha,
        label,
    }
}

/// Outcome of checking the defining inequality at one test point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    /// Index of the test point in the input list.
    pub point_index: usize,
    /// `g(y)` at the test point.
    pub g_at_y: f64,
    /// Norm of the selection `t` there.
    pub t_norm: f64,
    /// Largest value of `g(y) + <t, x - y>` over the level-set samples.
    pub worst_violation: f64,
    /// Whether the worst violation stays within tolerance.
    pub pass: bool,
}

/// Report from [`verify_zero_convexity`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Label of the oracle that was checked.
    pub oracle_label: String,
    /// Tolerance the check ran with.
    pub tol: f64,
    /// Per-test-point outcomes.
    pub checks: Vec<PointCheck>,
    /// Largest value of `g(y) + <t, x - y>` over all pairs.
    pub worst_violation: f64,
    /// Indices of level-set samples that failed `eval(x) <= tol` and were
    /// excluded from the check.
    pub rejected_samples: Vec<usize>,
}

impl VerificationReport {
    /// Whether every pair satisfied the inequality and no sample was
    /// rejected.
    pub fn passed(&self) -> bool {
        self.rejected_samples.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

/// Checks the defining inequality on sampled pairs.
///
/// For each test point `y`, obtains the selection `t = zero_subgradient(y)`
/// and evaluates `g(y) + <t, x - y>` against every level-set sample `x`;
/// the check passes when the maximum over all pairs is at most `tol`.
/// Samples with `eval(x) > tol` do not belong to the level set, contribute
/// nothing to the quantifier, and are reported as rejected; a report with
/// rejected samples never passes, since it means the caller's sample
/// generator is wrong.
pub fn verify_zero_convexity<O: ZeroConvexOracle + ?Sized>(
    g: &O,
    levelset_samples: &[Vector],
    test_points: &[Vector],
    tol: f64,
) -> VerificationReport {
    let mut rejected_samples = Vec::new();
    let mut admitted = Vec::new();
    for (index, x) in levelset_samples.iter().enumerate() {
        if g.eval(x) <= tol {
            admitted.push(x);
        } else {
            rejected_samples.push(index);
        }
    }

    let mut checks = Vec::with_capacity(test_points.len());
    let mut worst_violation = f64::NEG_INFINITY;
    for (point_index, y) in test_points.iter().enumerate() {
        let g_at_y = g.eval(y);
        let t = g.zero_subgradient(y);
        let mut worst = f64::NEG_INFINITY;
        for x in &admitted {
            let lhs = g_at_y + crate::linalg::dot(&t, &sub(x, y));
            if lhs > worst {
                worst = lhs;
            }
        }
        if worst > worst_violation {
            worst_violation = worst;
        }
        checks.push(PointCheck {
            point_index,
            g_at_y,
            t_norm: norm(&t),
            worst_violation: worst,
            pass: worst <= tol,
        });
    }

    VerificationReport {
        oracle_label: g.label().to_string(),
        tol,
        checks,
        worst_violation,
        rejected_samples,
    }
}
