//! Dense vectors and orthogonal projections onto boxes, hyperplanes, and
//! balls.
//!
//! Everything in this module is generic over the floating-point scalar
//! through the [`Scalar`] trait alias; the rest of the crate instantiates it
//! with `f64`. Dimensions are carried at runtime and checked on entry to
//! every operation: constructors report structural problems through
//! [`LinalgError`], while the arithmetic and projection functions panic on
//! dimension mismatch, which is always a programming error rather than a
//! data error.
//!
//! The projections are the textbook closed forms:
//!
//! * box: componentwise clamp onto `[lower_i, upper_i]`,
//! * hyperplane: `y - <y - anchor, normal> * normal` for a unit normal,
//! * ball: radial pull-back onto the sphere when outside.

use std::fmt;
use std::ops::Index;

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

/// Floating-point scalar the linear-algebra layer is generic over.
///
/// This is a trait alias: any type implementing [`num_traits::Float`] and
/// [`num_traits::FromPrimitive`] (in particular `f32` and `f64`) qualifies
/// automatically via the blanket implementation.
pub trait Scalar: Float + FromPrimitive + fmt::Debug + 'static {}

impl<T: Float + FromPrimitive + fmt::Debug + 'static> Scalar for T {}

/// Structural errors from constructing the types in this module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    /// A vector needs at least one coordinate.
    #[error("vector must have at least one coordinate")]
    EmptyVector,
    /// A coordinate was NaN or infinite.
    #[error("coordinate {index} is not finite")]
    NonFiniteCoordinate {
        /// Position of the offending coordinate.
        index: usize,
    },
    /// Two arguments that must share a dimension did not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch {
        /// Dimension of the first argument.
        left: usize,
        /// Dimension of the second argument.
        right: usize,
    },
    /// A box had `lower[i] > upper[i]` for some coordinate.
    #[error("box has lower[{index}] > upper[{index}]")]
    InvertedBounds {
        /// Position of the offending coordinate pair.
        index: usize,
    },
    /// A hyperplane direction had zero (or numerically zero) norm.
    #[error("hyperplane normal must be nonzero")]
    ZeroNormal,
    /// A ball radius was negative.
    #[error("ball radius must be nonnegative")]
    NegativeRadius,
}

/// Dense coordinate vector with runtime dimension.
///
/// Construction validates that the vector is nonempty and every coordinate
/// is finite; arithmetic on validated inputs stays finite for the magnitudes
/// this crate works with, so the results of [`axpy`] and friends are not
/// re-validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T: Scalar> {
    coords: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    /// Wraps a coordinate list as a vector.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::EmptyVector`] for an empty list and
    /// [`LinalgError::NonFiniteCoordinate`] if any entry is NaN or infinite.
    pub fn new(coords: Vec<T>) -> Result<Self, LinalgError> {
        if coords.is_empty() {
            return Err(LinalgError::EmptyVector);
        }
        for (index, c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(LinalgError::NonFiniteCoordinate { index });
            }
        }
        Ok(Self { coords })
    }

    /// The zero vector of the given dimension.
    ///
    /// # Panics
    ///
    /// Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self {
            coords: vec![T::zero(); dim],
        }
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The coordinates as a slice.
    pub fn as_slice(&self) -> &[T] {
        &self.coords
    }

    /// The coordinates as a mutable slice.
    ///
    /// Callers are responsible for keeping the entries finite.
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.coords
    }

    /// Consumes the vector and returns the raw coordinate list.
    pub fn into_vec(self) -> Vec<T> {
        self.coords
    }

    /// Iterator over the coordinates.
    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.coords.iter()
    }
}

impl<T: Scalar> Index<usize> for Vector<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        &self.coords[index]
    }
}

/// Axis-aligned box `{ x : lower_i <= x_i <= upper_i }`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion<T: Scalar> {
    lower: Vector<T>,
    upper: Vector<T>,
}

impl<T: Scalar> BoxRegion<T> {
    /// Builds a box from its componentwise bounds.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::DimensionMismatch`] if the bounds differ in
    /// dimension and [`LinalgError::InvertedBounds`] if `lower[i] > upper[i]`
    /// for some `i`.
    pub fn new(lower: Vector<T>, upper: Vector<T>) -> Result<Self, LinalgError> {
        if lower.dim() != upper.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: lower.dim(),
                right: upper.dim(),
            });
        }
        for (index, (lo, hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if lo > hi {
                return Err(LinalgError::InvertedBounds { index });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[-half_width, half_width]^dim`.
    ///
    /// # Panics
    ///
    /// Panics if `dim == 0` or `half_width` is negative or non-finite.
    pub fn centered_cube(dim: usize, half_width: T) -> Self {
        assert!(dim > 0, "box dimension must be positive");
        assert!(
            half_width.is_finite() && half_width >= T::zero(),
            "cube half-width must be finite and nonnegative"
        );
        Self {
            lower: Vector {
                coords: vec![-half_width; dim],
            },
            upper: Vector {
                coords: vec![half_width; dim],
            },
        }
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// Componentwise lower bounds.
    pub fn lower(&self) -> &Vector<T> {
        &self.lower
    }

    /// Componentwise upper bounds.
    pub fn upper(&self) -> &Vector<T> {
        &self.upper
    }

    /// Whether `x` lies in the box.
    ///
    /// # Panics
    ///
    /// Panics on dimension mismatch.
    pub fn contains(&self, x: &Vector<T>) -> bool {
        assert_eq!(self.dim(), x.dim(), "dimension mismatch");
        x.iter()
            .zip(self.lower.iter())
            .zip(self.upper.iter())
            .all(|((xi, lo), hi)| *lo <= *xi && *xi <= *hi)
    }

    /// Euclidean diameter `||upper - lower||`.
    ///
    /// For the cube `[-c, c]^d` this is `2c * sqrt(d)`; it dominates the
    /// distance from any interior point to any subset of the box, which is
    /// what the solver's perturbation bound needs from its `mu` parameter.
    pub fn diameter(&self) -> T {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(lo, hi)| (*hi - *lo) * (*hi - *lo))
            .fold(T::zero(), |acc, d| acc + d)
            .sqrt()
    }
}

/// Hyperplane `{ x : <x - anchor, normal> = 0 }` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane<T: Scalar> {
    anchor: Vector<T>,
    normal: Vector<T>,
}

impl<T: Scalar> Hyperplane<T> {
    /// Builds the hyperplane through `anchor` orthogonal to `direction`.
    ///
    /// The direction is normalized on construction, so the stored normal has
    /// unit norm.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::DimensionMismatch`] if the arguments differ in
    /// dimension and [`LinalgError::ZeroNormal`] if `direction` has zero
    /// norm.
    pub fn new(anchor: Vector<T>, direction: Vector<T>) -> Result<Self, LinalgError> {
        if anchor.dim() != direction.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: anchor.dim(),
                right: direction.dim(),
            });
        }
        let len = norm(&direction);
        if len == T::zero() {
            return Err(LinalgError::ZeroNormal);
        }
        let normal = scale(direction, T::one() / len);
        Ok(Self { anchor, normal })
    }

    /// A point on the plane.
    pub fn anchor(&self) -> &Vector<T> {
        &self.anchor
    }

    /// The unit normal.
    pub fn normal(&self) -> &Vector<T> {
        &self.normal
    }
}

/// Closed ball `{ x : ||x - center|| <= radius }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball<T: Scalar> {
    center: Vector<T>,
    radius: T,
}

impl<T: Scalar> Ball<T> {
    /// Builds the closed ball with the given center and radius.
    ///
    /// # Errors
    ///
    /// Returns [`LinalgError::NegativeRadius`] if `radius < 0` or is not
    /// finite.
    pub fn new(center: Vector<T>, radius: T) -> Result<Self, LinalgError> {
        if !(radius.is_finite() && radius >= T::zero()) {
            return Err(LinalgError::NegativeRadius);
        }
        Ok(Self { center, radius })
    }

    /// Center of the ball.
    pub fn center(&self) -> &Vector<T> {
        &self.center
    }

    /// Radius of the ball.
    pub fn radius(&self) -> T {
        self.radius
    }
}

/// Euclidean norm `||x||`.
pub fn norm<T: Scalar>(x: &Vector<T>) -> T {
    norm_sq(x).sqrt()
}

/// Squared Euclidean norm `||x||^2`.
pub fn norm_sq<T: Scalar>(x: &Vector<T>) -> T {
    x.iter().fold(T::zero(), |acc, xi| acc + *xi * *xi)
}

/// Inner product `<x, y>`.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn dot<T: Scalar>(x: &Vector<T>, y: &Vector<T>) -> T {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    x.iter()
        .zip(y.iter())
        .fold(T::zero(), |acc, (xi, yi)| acc + *xi * *yi)
}

/// The combination `a*x + y`.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn axpy<T: Scalar>(a: T, x: &Vector<T>, y: &Vector<T>) -> Vector<T> {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    Vector {
        coords: x
            .iter()
            .zip(y.iter())
            .map(|(xi, yi)| a * *xi + *yi)
            .collect(),
    }
}

/// Adds `a*x` into `y`.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn axpy_in_place<T: Scalar>(a: T, x: &Vector<T>, y: &mut Vector<T>) {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    for (yi, xi) in y.coords.iter_mut().zip(x.iter()) {
        *yi = a * *xi + *yi;
    }
}

/// The scalar multiple `a*x`.
pub fn scale<T: Scalar>(x: Vector<T>, a: T) -> Vector<T> {
    Vector {
        coords: x.coords.into_iter().map(|xi| a * xi).collect(),
    }
}

/// The difference `x - y`.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn sub<T: Scalar>(x: &Vector<T>, y: &Vector<T>) -> Vector<T> {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    Vector {
        coords: x.iter().zip(y.iter()).map(|(xi, yi)| *xi - *yi).collect(),
    }
}

/// Euclidean distance `||x - y||`.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn dist<T: Scalar>(x: &Vector<T>, y: &Vector<T>) -> T {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch");
    x.iter()
        .zip(y.iter())
        .map(|(xi, yi)| (*xi - *yi) * (*xi - *yi))
        .fold(T::zero(), |acc, d| acc + d)
        .sqrt()
}

/// Orthogonal projection of `x` onto the box: the componentwise clamp.
///
/// Points already in the box are returned unchanged, coordinate by
/// coordinate, so the projection is exact and idempotent.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn project_box<T: Scalar>(x: &Vector<T>, omega: &BoxRegion<T>) -> Vector<T> {
    let mut out = x.clone();
    project_box_in_place(&mut out, omega);
    out
}

/// In-place variant of [`project_box`].
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn project_box_in_place<T: Scalar>(x: &mut Vector<T>, omega: &BoxRegion<T>) {
    assert_eq!(x.dim(), omega.dim(), "dimension mismatch");
    for ((xi, lo), hi) in x
        .coords
        .iter_mut()
        .zip(omega.lower.iter())
        .zip(omega.upper.iter())
    {
        if *xi < *lo {
            *xi = *lo;
        } else if *xi > *hi {
            *xi = *hi;
        }
    }
}

/// Orthogonal projection of `y` onto the hyperplane.
///
/// With `beta = <y - anchor, normal>` the projection is `y - beta * normal`;
/// the normal is unit by construction of [`Hyperplane`].
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn project_hyperplane<T: Scalar>(y: &Vector<T>, plane: &Hyperplane<T>) -> Vector<T> {
    assert_eq!(y.dim(), plane.anchor.dim(), "dimension mismatch");
    let offset = sub(y, &plane.anchor);
    let beta = dot(&offset, &plane.normal);
    axpy(-beta, &plane.normal, y)
}

/// Orthogonal projection of `y` onto the closed ball.
///
/// Interior and boundary points are returned unchanged; exterior points are
/// pulled radially onto the sphere.
///
/// # Panics
///
/// Panics on dimension mismatch.
pub fn project_ball<T: Scalar>(y: &Vector<T>, ball: &Ball<T>) -> Vector<T> {
    assert_eq!(y.dim(), ball.center.dim(), "dimension mismatch");
    let offset = sub(y, &ball.center);
    let len = norm(&offset);
    if len <= ball.radius {
        return y.clone();
    }
    axpy(ball.radius / len, &offset, &ball.center)
}
