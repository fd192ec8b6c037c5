//! The perturbed sequential subgradient projection engine.
//!
//! Given zero-convex constraint functions `g_0, ..., g_{l3-1}`, a box
//! `omega`, and a start `x_0` in the box, the solver iterates
//!
//! ```text
//! x_{n+1} = P_omega( x_n - lambda_n * g_j(x_n) / ||t_n||^2 * t_n + b_n )
//! ```
//!
//! when `g_j(x_n) > 0` for the index `j = i(n)` picked by the control
//! sequence, and `x_{n+1} = x_n` otherwise. Here `t_n` is the oracle's
//! 0-subgradient selection at `x_n`, `lambda_n` is a relaxation parameter
//! confined to `[eps1, 2 - eps2]`, and `b_n` is an optional random
//! perturbation.
//!
//! Convergence rests on two quantities per active step: the *progress
//! measure* `h_n = g_j(x_n) / ||t_n||` and the perturbation budget
//!
//! ```text
//! ||b_n|| <= min( mu, eps1 * eps2 * h_n^2 / (2 * (5 mu + 4 h_n)) ),
//! ```
//!
//! where `mu` exceeds the distance from `x_0` to the feasible intersection
//! (defaulted to the diameter of `omega`, which dominates it). Under this
//! budget every step satisfies the decrease inequality
//!
//! ```text
//! ||x_{n+1} - x||^2  <=  ||x_n - x||^2 - eps1 * eps2 * h_n^2 / 2
//! ```
//!
//! for every feasible `x` with `||x_0 - x|| <= 2 mu`, which makes the
//! iterate sequence Fejer monotone and summability arguments go through;
//! [`fejer_check`] verifies it post hoc on recorded runs.
//!
//! # Randomness
//!
//! All randomness comes from one named, portable generator (ChaCha with 8
//! rounds) seeded from [`SolverConfig::seed`] and split into fixed streams:
//! [`STREAM_CONTROL`] drives the control sequence, [`STREAM_LAMBDA`] the
//! random relaxation schedule, [`STREAM_PERTURB`] the perturbation
//! directions, and [`STREAM_SCENARIO`] is reserved for downstream scenario
//! generation. Inactive steps draw nothing from any stream, so replaying a
//! run is independent of residual sign noise.
//!
//! # Stopping
//!
//! Feasibility (`g_j(x_n) <= tolerance` for all `j`) is tested every
//! `check_period` iterations, including at `n = 0`, so reported iteration
//! counts are always multiples of the period. The run ends with status
//! [`RunStatus::IterationCapReached`] when `n` reaches `max_iter` first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{axpy, dist, norm, norm_sq, project_box_in_place, scale};
use crate::zero_convex::ZeroConvexOracle;
use crate::{BoxRegion, Vector};

/// RNG stream driving control-sequence randomness.
pub const STREAM_CONTROL: u64 = 0;
/// RNG stream driving the random relaxation schedule.
pub const STREAM_LAMBDA: u64 = 1;
/// RNG stream driving perturbation directions.
pub const STREAM_PERTURB: u64 = 2;
/// RNG stream reserved for scenario generation in downstream crates.
pub const STREAM_SCENARIO: u64 = 3;

/// Default feasibility tolerance (the stopping `smallNumber`).
pub const DEFAULT_TOLERANCE: f64 = 1e-5;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: u64 = 5_000_000;
/// Slack for relaxation range checks, absorbing decimal-literal rounding.
pub const RELAXATION_SLACK: f64 = 1e-9;
/// Tolerance for the per-step Fejer decrease inequality.
pub const FEJER_TOL: f64 = 1e-9;
/// Tolerance for the inner/outer perturbation equivalence.
pub const INNER_OUTER_TOL: f64 = 1e-10;
/// Slack for the recorded perturbation norms against their bound.
pub const PERTURBATION_SLACK: f64 = 1e-15;

/// Errors from problem construction, configuration validation, and the
/// iteration itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    /// The problem needs at least one constraint function.
    #[error("problem needs at least one constraint function")]
    NoOracles,
    /// An oracle's dimension disagrees with the box.
    #[error("oracle '{label}' has dimension {found}, expected {expected}")]
    OracleDimensionMismatch {
        /// Label of the offending oracle.
        label: String,
        /// Dimension of the box and starting point.
        expected: usize,
        /// The oracle's dimension.
        found: usize,
    },
    /// The starting point must lie in the box.
    #[error("starting point lies outside the box")]
    StartOutsideBox,
    /// `eps1` and `eps2` must be positive.
    #[error("eps1 and eps2 must be positive, got eps1 = {eps1}, eps2 = {eps2}")]
    NonPositiveEps {
        /// Configured `eps1`.
        eps1: f64,
        /// Configured `eps2`.
        eps2: f64,
    },
    /// `eps1 + eps2 <= 2` is required for the convergence guarantee.
    #[error(
        "eps1 + eps2 = {sum} exceeds 2; set allow_eps_sum_violation to run outside the guarantee"
    )]
    EpsSumExceedsTwo {
        /// The offending sum.
        sum: f64,
    },
    /// An explicit relaxation value must lie in `[eps1, 2 - eps2]`.
    #[error("relaxation {lambda} is outside [{low}, {high}]")]
    RelaxationOutOfRange {
        /// The configured value.
        lambda: f64,
        /// Lower end of the admissible interval.
        low: f64,
        /// Upper end of the admissible interval.
        high: f64,
    },
    /// An explicit relaxation value must be positive.
    #[error("relaxation must be positive, got {lambda}")]
    NonPositiveRelaxation {
        /// The configured value.
        lambda: f64,
    },
    /// The random relaxation schedule needs a nonempty interval.
    #[error("random relaxation interval [{low}, {high}] is empty")]
    EmptyRelaxationRange {
        /// Lower end of the interval.
        low: f64,
        /// Upper end of the interval.
        high: f64,
    },
    /// A scalar parameter that must be positive was not.
    #[error("{name} must be positive")]
    NonPositiveParameter {
        /// Name of the offending parameter.
        name: &'static str,
    },
    /// An oracle returned the zero vector on an active point.
    #[error(
        "invalid 0-subgradient selection: oracle '{label}' returned t = 0 \
         at iteration {n} where g = {g_val}"
    )]
    InvalidSubgradientSelection {
        /// Label of the offending oracle.
        label: String,
        /// Function value at the point, strictly positive.
        g_val: f64,
        /// Iteration index.
        n: u64,
    },
    /// A Fejer reference point must be feasible.
    #[error("reference point is infeasible: max residual {max_residual} exceeds {tolerance}")]
    InfeasibleReference {
        /// Largest constraint value at the reference.
        max_residual: f64,
        /// Tolerance the check ran with.
        tolerance: f64,
    },
    /// A Fejer reference point must satisfy `||x0 - ref|| <= 2 mu`.
    #[error("reference point too far from the start: {distance} exceeds 2 mu = {limit}")]
    ReferenceTooFar {
        /// Distance from the start to the reference.
        distance: f64,
        /// The admissible limit `2 mu`.
        limit: f64,
    },
    /// An explicit almost-cyclic bit array must be nonempty.
    #[error("control bit array must be nonempty")]
    EmptyControlBits,
}

/// How the relaxation parameter `lambda_n` is chosen each active step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationSchedule {
    /// `lambda = eps1`, the lower end of the admissible interval.
    ConstLow,
    /// `lambda = 2 - eps2`, the upper end.
    ConstHigh,
    /// `lambda = (eps1 + 2 - eps2) / 2`, the midpoint.
    ConstMid,
    /// A fixed caller-chosen value inside the interval.
    ConstExplicit(f64),
    /// Drawn uniformly from `[eps1, 2 - eps2]` per active step.
    UniformRandom,
}

/// How the constraint index `i(n)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// `i(n) = n mod l3`.
    Cyclic,
    /// The randomized almost-cyclic rule of period `3 l3`: a 0/1 array of
    /// length `2 l3` whose second half complements the first decides, per
    /// position `k = n mod 2 l3`, between the deterministic index `k mod
    /// l3` (bit 1) and a uniformly random index (bit 0). Every index is
    /// visited at least once in any window of `3 l3` consecutive steps.
    AlmostCyclicRandom,
    /// Independent uniform indices.
    PureRandom,
}

impl ControlMode {
    /// Default feasibility-check period for `l3` constraint functions:
    /// one visit cycle for the cyclic and random controls, `3 l3` (the
    /// almost-cyclicity window) for the almost-cyclic control.
    pub fn default_check_period(self, num_functions: usize) -> u64 {
        match self {
            ControlMode::Cyclic | ControlMode::PureRandom => num_functions as u64,
            ControlMode::AlmostCyclicRandom => 3 * num_functions as u64,
        }
    }
}

/// Full parameter set for one solver run.
///
/// `mu` and `check_period` are optional; unset values resolve against the
/// problem via [`SolverConfig::resolved_mu`] (the box diameter) and
/// [`SolverConfig::resolved_check_period`] (the control mode's default).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Lower relaxation margin; `lambda_n >= eps1`.
    pub eps1: f64,
    /// Upper relaxation margin; `lambda_n <= 2 - eps2`.
    pub eps2: f64,
    /// Relaxation schedule.
    pub relaxation: RelaxationSchedule,
    /// Control mode.
    pub control: ControlMode,
    /// Whether to add random perturbations within the admissible budget.
    pub perturb: bool,
    /// Upper bound on the distance from `x_0` to the feasible set; `None`
    /// resolves to the box diameter.
    pub mu: Option<f64>,
    /// Feasibility tolerance for the periodic stopping test.
    pub tolerance: f64,
    /// Iterations between stopping tests; `None` resolves per control mode.
    pub check_period: Option<u64>,
    /// Iteration cap.
    pub max_iter: u64,
    /// Seed for all random streams.
    pub seed: u64,
    /// Permits `eps1 + eps2 > 2` and out-of-interval explicit relaxations,
    /// for experiments outside the convergence guarantee. The random
    /// schedule still requires a nonempty interval.
    pub allow_eps_sum_violation: bool,
}

impl SolverConfig {
    /// A config with the given margins and conservative defaults: midpoint
    /// relaxation, cyclic control, no perturbations, default tolerance and
    /// iteration cap, seed 0.
    pub fn new(eps1: f64, eps2: f64) -> Self {
        Self {
            eps1,
            eps2,
            relaxation: RelaxationSchedule::ConstMid,
            control: ControlMode::Cyclic,
            perturb: false,
            mu: None,
            tolerance: DEFAULT_TOLERANCE,
            check_period: None,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            allow_eps_sum_violation: false,
        }
    }

    /// Checks the parameter invariants.
    ///
    /// # Errors
    ///
    /// See the [`SolverError`] variants for the individual violations.
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.eps1 > 0.0 && self.eps2 > 0.0) {
            return Err(SolverError::NonPositiveEps {
                eps1: self.eps1,
                eps2: self.eps2,
            });
        }
        let high = 2.0 - self.eps2;
        if !self.allow_eps_sum_violation && self.eps1 + self.eps2 > 2.0 + RELAXATION_SLACK {
            return Err(SolverError::EpsSumExceedsTwo {
                sum: self.eps1 + self.eps2,
            });
        }
        match self.relaxation {
            RelaxationSchedule::ConstExplicit(lambda) if self.allow_eps_sum_violation => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(SolverError::NonPositiveRelaxation { lambda });
                }
            }
            RelaxationSchedule::ConstExplicit(lambda) => {
                if !lambda.is_finite()
                    || lambda < self.eps1 - RELAXATION_SLACK
                    || lambda > high + RELAXATION_SLACK
                {
                    return Err(SolverError::RelaxationOutOfRange {
                        lambda,
                        low: self.eps1,
                        high,
                    });
                }
            }
            RelaxationSchedule::UniformRandom if self.eps1 > high + RELAXATION_SLACK => {
                return Err(SolverError::EmptyRelaxationRange {
                    low: self.eps1,
                    high,
                });
            }
            _ => {}
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(SolverError::NonPositiveParameter { name: "mu" });
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(SolverError::NonPositiveParameter { name: "tolerance" });
        }
        if self.check_period == Some(0) {
            return Err(SolverError::NonPositiveParameter {
                name: "check_period",
            });
        }
        if self.max_iter == 0 {
            return Err(SolverError::NonPositiveParameter { name: "max_iter" });
        }
        Ok(())
    }

    /// The `mu` in effect for a problem over `omega`: the configured value,
    /// or the box diameter, which dominates the distance from any start in
    /// the box to any subset of it.
    pub fn resolved_mu(&self, omega: &BoxRegion) -> f64 {
        self.mu.unwrap_or_else(|| omega.diameter())
    }

    /// The stopping-test period in effect for `num_functions` constraints.
    pub fn resolved_check_period(&self, num_functions: usize) -> u64 {
        self.check_period
            .unwrap_or_else(|| self.control.default_check_period(num_functions))
    }
}

/// A feasibility problem: constraint oracles, a box, and a start.
pub struct Problem {
    oracles: Vec<Box<dyn ZeroConvexOracle>>,
    omega: BoxRegion,
    x0: Vector,
}

impl Problem {
    /// Assembles a problem after checking that the oracle list is
    /// nonempty, every oracle matches the box dimension, and the start
    /// lies in the box.
    ///
    /// # Errors
    ///
    /// [`SolverError::NoOracles`], [`SolverError::OracleDimensionMismatch`],
    /// or [`SolverError::StartOutsideBox`].
    pub fn new(
        oracles: Vec<Box<dyn ZeroConvexOracle>>,
        omega: BoxRegion,
        x0: Vector,
    ) -> Result<Self, SolverError> {
        if oracles.is_empty() {
            return Err(SolverError::NoOracles);
        }
        let expected = omega.dim();
        for oracle in &oracles {
            if oracle.dim() != expected {
                return Err(SolverError::OracleDimensionMismatch {
                    label: oracle.label().to_string(),
                    expected,
                    found: oracle.dim(),
                });
            }
        }
        if x0.dim() != expected || !omega.contains(&x0) {
            return Err(SolverError::StartOutsideBox);
        }
        Ok(Self { oracles, omega, x0 })
    }

    /// The constraint oracles, in index order.
    pub fn oracles(&self) -> &[Box<dyn ZeroConvexOracle>] {
        &self.oracles
    }

    /// Number of constraint functions (the `l3` of the control sequence).
    pub fn num_functions(&self) -> usize {
        self.oracles.len()
    }

    /// The box the iterates are projected onto.
    pub fn omega(&self) -> &BoxRegion {
        &self.omega
    }

    /// The starting point.
    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// All constraint values at `x`, in index order.
    pub fn residuals(&self, x: &Vector) -> Vec<f64> {
        self.oracles.iter().map(|g| g.eval(x)).collect()
    }

    /// The largest constraint value at `x`.
    pub fn max_residual(&self, x: &Vector) -> f64 {
        self.oracles
            .iter()
            .map(|g| g.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether every constraint value at `x` is at most `tol`.
    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        self.oracles.iter().all(|g| g.eval(x) <= tol)
    }
}

/// The index-selection sequence `i(n)`, consumed one step at a time.
#[derive(Debug, Clone)]
pub struct ControlSequence {
    mode: ControlMode,
    l3: usize,
    /// Length `2 l3` for the almost-cyclic mode, empty otherwise.
    bits: Vec<bool>,
    rng: ChaCha8Rng,
    cursor: u64,
}

impl ControlSequence {
    /// The next index `i(n)` and cursor advance.
    pub fn next_index(&mut self) -> usize {
        let n = self.cursor;
        self.cursor += 1;
        match self.mode {
            ControlMode::Cyclic => (n % self.l3 as u64) as usize,
            ControlMode::PureRandom => self.rng.gen_range(0..self.l3),
            ControlMode::AlmostCyclicRandom => {
                let k = (n % (2 * self.l3 as u64)) as usize;
                if self.bits[k] {
                    k % self.l3
                } else {
                    self.rng.gen_range(0..self.l3)
                }
            }
        }
    }

    /// How many indices have been produced so far.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// The mode this sequence follows.
    pub fn mode(&self) -> ControlMode {
        self.mode
    }
}

/// Builds the control sequence for `num_functions` constraints.
///
/// For [`ControlMode::AlmostCyclicRandom`] the defining 0/1 array of length
/// `2 * num_functions` is drawn here (first half random, second half the
/// complement), from the control stream of `seed`; the subsequent random
/// indices come from the same stream.
///
/// # Panics
///
/// Panics if `num_functions == 0`.
pub fn make_control(mode: ControlMode, num_functions: usize, seed: u64) -> ControlSequence {
    assert!(num_functions >= 1, "control needs at least one function");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CONTROL);
    let bits = match mode {
        ControlMode::AlmostCyclicRandom => {
            let mut bits: Vec<bool> = (0..num_functions).map(|_| rng.gen::<bool>()).collect();
            for k in 0..num_functions {
                let complement = !bits[k];
                bits.push(complement);
            }
            bits
        }
        _ => Vec::new(),
    };
    ControlSequence {
        mode,
        l3: num_functions,
        bits,
        rng,
        cursor: 0,
    }
}

/// Builds an almost-cyclic control from an explicit first-half bit array,
/// for reproducing hand-traced sequences; the second half is the
/// complement, as in [`make_control`].
///
/// # Errors
///
/// [`SolverError::EmptyControlBits`] if `first_half` is empty.
pub fn almost_cyclic_with_bits(
    first_half: Vec<bool>,
    seed: u64,
) -> Result<ControlSequence, SolverError> {
    if first_half.is_empty() {
        return Err(SolverError::EmptyControlBits);
    }
    let l3 = first_half.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CONTROL);
    let mut bits = first_half;
    for k in 0..l3 {
        let complement = !bits[k];
        bits.push(complement);
    }
    Ok(ControlSequence {
        mode: ControlMode::AlmostCyclicRandom,
        l3,
        bits,
        rng,
        cursor: 0,
    })
}

/// Mutable state of one run: the iterate, the step counter, and the
/// random streams.
#[derive(Debug, Clone)]
pub struct IterationState {
    n: u64,
    x: Vector,
    control: ControlSequence,
    lambda_rng: ChaCha8Rng,
    perturb_rng: ChaCha8Rng,
    mu: f64,
}

impl IterationState {
    /// Initializes a run: validates the config, resolves `mu`, seeds the
    /// streams, and copies the starting point.
    ///
    /// # Errors
    ///
    /// Propagates [`SolverConfig::validate`] failures, plus
    /// [`SolverError::NonPositiveParameter`] if the resolved `mu` is zero
    /// (a degenerate box with no configured override).
    pub fn new(problem: &Problem, cfg: &SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let mu = cfg.resolved_mu(&problem.omega);
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(SolverError::NonPositiveParameter { name: "mu" });
        }
        let control = make_control(cfg.control, problem.num_functions(), cfg.seed);
        let mut lambda_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        lambda_rng.set_stream(STREAM_LAMBDA);
        let mut perturb_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        perturb_rng.set_stream(STREAM_PERTURB);
        Ok(Self {
            n: 0,
            x: problem.x0.clone(),
            control,
            lambda_rng,
            perturb_rng,
            mu,
        })
    }

    /// The iteration counter `n`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// The current iterate `x_n`.
    pub fn x(&self) -> &Vector {
        &self.x
    }

    /// Position of the control sequence.
    pub fn control_cursor(&self) -> u64 {
        self.control.cursor()
    }

    /// The `mu` in effect for this run.
    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// What one call to [`step`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Iteration index `n` (the step maps `x_n` to `x_{n+1}`).
    pub n: u64,
    /// Constraint index `i(n)` the control picked.
    pub j: usize,
    /// `g_j(x_n)`.
    pub g_val: f64,
    /// `||t_n||`; zero on inactive steps.
    pub t_norm: f64,
    /// Progress measure `h_n = g_val / t_norm`; zero on inactive steps.
    pub h: f64,
    /// Relaxation `lambda_n`; zero on inactive steps (none is drawn).
    pub lambda: f64,
    /// `||b_n||` of the applied perturbation; zero on inactive steps and
    /// unperturbed runs.
    pub b_norm: f64,
    /// Whether the update fired (`g_val > 0`).
    pub active: bool,
}

/// The perturbation budget `min(mu, eps1*eps2*h^2 / (2*(5 mu + 4 h)))`.
///
/// Returns 0 when `h <= 0`, so perturbations vanish with the progress
/// measure; that is what keeps them convergence-neutral.
pub fn perturbation_bound(h: f64, mu: f64, eps1: f64, eps2: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    mu.min(eps1 * eps2 * h * h / (2.0 * (5.0 * mu + 4.0 * h)))
}

/// A random vector of norm [`perturbation_bound`]`(h, mu, eps1, eps2)`.
///
/// The direction is uniform on the unit sphere (normalized standard
/// Gaussian coordinates); the norm is then pulled back below the bound if
/// final rounding left it an ulp above, so recorded norms never exceed the
/// budget they certify. Returns the zero vector when the bound is zero.
pub fn make_perturbation<R: Rng>(
    h: f64,
    mu: f64,
    eps1: f64,
    eps2: f64,
    dim: usize,
    rng: &mut R,
) -> Vector {
    let bound = perturbation_bound(h, mu, eps1, eps2);
    if bound <= 0.0 {
        return Vector::zeros(dim);
    }
    let mut coords: Vec<f64>;
    let mut len_sq: f64;
    loop {
        coords = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        len_sq = coords.iter().map(|c| c * c).sum();
        if len_sq > 0.0 {
            break;
        }
    }
    let factor = bound / len_sq.sqrt();
    let mut b = Vector::new(coords.into_iter().map(|c| c * factor).collect())
        .expect("scaled Gaussian coordinates are finite");
    let mut len = norm(&b);
    while len > bound {
        b = scale(b, (bound / len).min(1.0 - 1e-15));
        len = norm(&b);
    }
    b
}

/// The unprojected active update `x - lambda * g / ||t||^2 * t`.
///
/// Shared between the solver step and the inner-recursion replay so the two
/// compute bit-identical floating-point results.
fn active_update(x: &Vector, t: &Vector, g_val: f64, t_sq: f64, lambda: f64) -> Vector {
    axpy(-(lambda * g_val / t_sq), t, x)
}

/// Extra per-step data the inner/outer equivalence analysis needs.
struct StepDetail {
    /// The perturbation vector actually added; `None` on inactive steps
    /// and unperturbed runs.
    b_tilde: Option<Vector>,
    /// Whether the box projection moved the updated point.
    clipped: bool,
}

/// One iteration, with the detail record.
fn step_full(
    state: &mut IterationState,
    problem: &Problem,
    cfg: &SolverConfig,
) -> Result<(StepRecord, StepDetail), SolverError> {
    let n = state.n;
    let j = state.control.next_index();
    let oracle = &problem.oracles[j];
    let g_val = oracle.eval(&state.x);

    if g_val <= 0.0 {
        state.n += 1;
        return Ok((
            StepRecord {
                n,
                j,
                g_val,
                t_norm: 0.0,
                h: 0.0,
                lambda: 0.0,
                b_norm: 0.0,
                active: false,
            },
            StepDetail {
                b_tilde: None,
                clipped: false,
            },
        ));
    }

    let t = oracle.zero_subgradient(&state.x);
    let t_sq = norm_sq(&t);
    if t_sq == 0.0 {
        return Err(SolverError::InvalidSubgradientSelection {
            label: oracle.label().to_string(),
            g_val,
            n,
        });
    }
    let t_norm = t_sq.sqrt();
    // The progress measure uses the unperturbed selection; the perturbation
    // budget below is a function of this h.
    let h = g_val / t_norm;
    let lambda = match cfg.relaxation {
        RelaxationSchedule::ConstLow => cfg.eps1,
        RelaxationSchedule::ConstHigh => 2.0 - cfg.eps2,
        RelaxationSchedule::ConstMid => 0.5 * (cfg.eps1 + 2.0 - cfg.eps2),
        RelaxationSchedule::ConstExplicit(value) => value,
        RelaxationSchedule::UniformRandom => {
            state.lambda_rng.gen_range(cfg.eps1..=2.0 - cfg.eps2)
        }
    };

    let mut candidate = active_update(&state.x, &t, g_val, t_sq, lambda);
    let (b_norm, b_tilde) = if cfg.perturb {
        let b = make_perturbation(h, state.mu, cfg.eps1, cfg.eps2, problem.dim(), &mut state.perturb_rng);
        let b_norm = norm(&b);
        candidate = axpy(1.0, &b, &candidate);
        (b_norm, Some(b))
    } else {
        (0.0, None)
    };

    let clipped = !problem.omega.contains(&candidate);
    project_box_in_place(&mut candidate, &problem.omega);
    state.x = candidate;
    state.n += 1;

    Ok((
        StepRecord {
            n,
            j,
            g_val,
            t_norm,
            h,
            lambda,
            b_norm,
            active: true,
        },
        StepDetail { b_tilde, clipped },
    ))
}

/// One iteration of the algorithm: picks `i(n)`, applies the (possibly
/// perturbed, relaxed) subgradient projection if the constraint is
/// violated, projects onto the box, and advances the state.
///
/// # Errors
///
/// [`SolverError::InvalidSubgradientSelection`] if the oracle returns the
/// zero vector at a point with positive value, which no valid selection
/// can do when the constraint set is nonempty.
pub fn step(
    state: &mut IterationState,
    problem: &Problem,
    cfg: &SolverConfig,
) -> Result<StepRecord, SolverError> {
    step_full(state, problem, cfg).map(|(record, _)| record)
}

/// Terminal status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// A periodic check found all constraints within tolerance.
    Feasible,
    /// The iteration cap was reached first.
    IterationCapReached,
}

/// Per-step history of a traced run.
#[derive(Debug, Clone)]
pub struct Trace {
    /// One record per step, in order.
    pub records: Vec<StepRecord>,
    /// Iterate snapshots `x_0, ..., x_N` (one more than `records`).
    pub iterates: Vec<Vector>,
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// How the run ended.
    pub status: RunStatus,
    /// For a feasible run, the `n` at which the periodic check first
    /// passed (always a multiple of the check period; 0 when the start is
    /// already feasible). For a capped run, the cap.
    pub iterations: u64,
    /// The final iterate.
    pub final_point: Vector,
    /// All constraint values at the final iterate.
    pub residuals: Vec<f64>,
    /// Sum of the applied perturbation norms over the whole run.
    pub perturbation_norm_sum: f64,
    /// Per-step history; `None` unless the run was traced.
    pub trace: Option<Trace>,
}

impl RunResult {
    /// The largest constraint value at the final iterate.
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn solve_impl(
    problem: &Problem,
    cfg: &SolverConfig,
    traced: bool,
) -> Result<RunResult, SolverError> {
    let mut state = IterationState::new(problem, cfg)?;
    let check_period = cfg.resolved_check_period(problem.num_functions());
    let mut records = Vec::new();
    let mut iterates = Vec::new();
    if traced {
        iterates.push(state.x.clone());
    }
    let mut perturbation_norm_sum = 0.0;

    loop {
        let n = state.n;
        if n % check_period == 0 {
            let residuals = problem.residuals(&state.x);
            let max = residuals
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            if max <= cfg.tolerance {
                return Ok(RunResult {
                    status: RunStatus::Feasible,
                    iterations: n,
                    final_point: state.x.clone(),
                    residuals,
                    perturbation_norm_sum,
                    trace: traced.then_some(Trace { records, iterates }),
                });
            }
        }
        if n >= cfg.max_iter {
            return Ok(RunResult {
                status: RunStatus::IterationCapReached,
                iterations: n,
                final_point: state.x.clone(),
                residuals: problem.residuals(&state.x),
                perturbation_norm_sum,
                trace: traced.then_some(Trace { records, iterates }),
            });
        }
        let (record, _) = step_full(&mut state, problem, cfg)?;
        perturbation_norm_sum += record.b_norm;
        if traced {
            records.push(record);
            iterates.push(state.x.clone());
        }
    }
}

/// Runs the iteration until a periodic check passes or the cap is hit.
///
/// Deterministic: identical `(problem, cfg)` including the seed give an
/// identical [`RunResult`].
///
/// # Errors
///
/// Propagates configuration and selection errors; reaching the iteration
/// cap is a status, not an error.
pub fn solve(problem: &Problem, cfg: &SolverConfig) -> Result<RunResult, SolverError> {
    solve_impl(problem, cfg, false)
}

/// Like [`solve`], but records the full per-step trace and iterate
/// history. Memory grows linearly with the run length.
pub fn solve_traced(problem: &Problem, cfg: &SolverConfig) -> Result<RunResult, SolverError> {
    solve_impl(problem, cfg, true)
}

/// Outcome of checking the per-step Fejer decrease inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct FejerReport {
    /// Number of steps checked.
    pub steps_checked: usize,
    /// Largest value of
    /// `||x_{n+1} - ref||^2 - ||x_n - ref||^2 + eps1*eps2*h_n^2/2`.
    pub worst_violation: f64,
    /// Whether the worst violation stays within [`FEJER_TOL`].
    pub pass: bool,
}

/// Checks the decrease inequality along a recorded trace.
///
/// For every step the trace recorded, verifies
///
/// ```text
/// ||x_{n+1} - ref||^2  <=  ||x_n - ref||^2 - eps1 * eps2 * h_n^2 / 2
/// ```
///
/// against a feasible reference point. Inactive steps satisfy it with
/// equality since `h_n = 0` and the iterate does not move.
///
/// # Errors
///
/// [`SolverError::InfeasibleReference`] if the reference violates a
/// constraint beyond `cfg.tolerance`, and [`SolverError::ReferenceTooFar`]
/// if `||x_0 - ref|| > 2 mu`, outside the inequality's guarantee region.
pub fn fejer_check(
    problem: &Problem,
    trace: &Trace,
    reference: &Vector,
    cfg: &SolverConfig,
) -> Result<FejerReport, SolverError> {
    let max_residual = problem.max_residual(reference);
    if max_residual > cfg.tolerance {
        return Err(SolverError::InfeasibleReference {
            max_residual,
            tolerance: cfg.tolerance,
        });
    }
    let mu = cfg.resolved_mu(&problem.omega);
    let start = trace
        .iterates
        .first()
        .expect("a trace holds at least the starting iterate");
    let distance = dist(start, reference);
    if distance > 2.0 * mu {
        return Err(SolverError::ReferenceTooFar {
            distance,
            limit: 2.0 * mu,
        });
    }

    let mut worst = f64::NEG_INFINITY;
    for (k, record) in trace.records.iter().enumerate() {
        let before = norm_sq(&crate::linalg::sub(&trace.iterates[k], reference));
        let after = norm_sq(&crate::linalg::sub(&trace.iterates[k + 1], reference));
        let decrease = 0.5 * cfg.eps1 * cfg.eps2 * record.h * record.h;
        let violation = after - (before - decrease);
        if violation > worst {
            worst = violation;
        }
    }
    Ok(FejerReport {
        steps_checked: trace.records.len(),
        worst_violation: worst,
        pass: worst <= FEJER_TOL,
    })
}

/// The bound on the summed perturbation norms along a convergent run.
///
/// Each budget is at most `beta * h_n^2` with `beta = eps1*eps2/(10 mu)`,
/// and the decrease inequality sums to
/// `sum h_n^2 <= 2 ||x_0 - ref||^2 / (eps1 eps2)` for any feasible `ref`
/// within `2 mu` of the start, so
///
/// ```text
/// sum ||b_n||  <=  ||x_0 - ref||^2 / (5 mu).
/// ```
pub fn perturbation_sum_bound(x0: &Vector, reference: &Vector, mu: f64) -> f64 {
    let d = dist(x0, reference);
    d * d / (5.0 * mu)
}

/// One recorded step of the outer recursion, for the inner replay.
struct ReplayStep {
    j: usize,
    /// Relaxation used; `None` for inactive steps, which drew none.
    lambda: Option<f64>,
    /// Perturbation added; `None` for inactive steps and unperturbed runs.
    b_tilde: Option<Vector>,
}

/// Result of comparing the inner and outer perturbation recursions.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Whether the box projection clipped any iterate; if so the
    /// equivalence is not asserted and `max_deviation` is NaN.
    pub clipped: bool,
    /// Steps compared.
    pub steps_compared: usize,
    /// Largest `||x_{n+1} - (z_n + b_n)||` over the run.
    pub max_deviation: f64,
}

impl EquivalenceReport {
    /// Whether the equivalence was asserted and held within
    /// [`INNER_OUTER_TOL`]. A clipped run never holds (its deviation is
    /// NaN); a zero-step run holds vacuously.
    pub fn holds(&self) -> bool {
        !self.clipped && self.max_deviation <= INNER_OUTER_TOL
    }
}

/// Applies the unprojected step operator `A_n` at an arbitrary point, for
/// the inner replay. Uses the recorded relaxation; inactive applications
/// are the identity.
fn reapply(
    problem: &Problem,
    step: &ReplayStep,
    w: &Vector,
    n: u64,
) -> Result<Vector, SolverError> {
    let oracle = &problem.oracles[step.j];
    let g_val = oracle.eval(w);
    if g_val <= 0.0 {
        return Ok(w.clone());
    }
    let t = oracle.zero_subgradient(w);
    let t_sq = norm_sq(&t);
    if t_sq == 0.0 {
        return Err(SolverError::InvalidSubgradientSelection {
            label: oracle.label().to_string(),
            g_val,
            n,
        });
    }
    // A missing relaxation means the outer run saw this step as inactive;
    // reaching here then means the recursions already diverged, which the
    // deviation measurements expose. Zero keeps the replay well defined.
    let lambda = step.lambda.unwrap_or(0.0);
    Ok(active_update(w, &t, g_val, t_sq, lambda))
}

/// Runs the outer (post-operator) perturbation recursion while recording
/// enough to replay the inner (pre-operator) recursion
///
/// ```text
/// z_0 = A_0(x_0),    z_{n+1} = A_{n+1}(z_n + b_n),
/// ```
///
/// in which the perturbation is added *before* the next operator
/// application instead of after the current one. When the box never clips
/// (the box stands in for the whole space), the identity
/// `x_{n+1} = z_n + b_n` holds exactly; the report carries the largest
/// observed deviation, and the replay shares the outer run's floating
/// point operations verbatim, so unclipped deviations are zero bits.
///
/// The returned [`RunResult`] is identical to what [`solve`] produces for
/// the same inputs. Memory grows linearly with the run length; keep the
/// iteration cap moderate.
///
/// # Errors
///
/// As for [`solve`].
pub fn solve_inner_perturbed(
    problem: &Problem,
    cfg: &SolverConfig,
) -> Result<(RunResult, EquivalenceReport), SolverError> {
    let mut state = IterationState::new(problem, cfg)?;
    let check_period = cfg.resolved_check_period(problem.num_functions());
    let mut iterates = vec![state.x.clone()];
    let mut steps: Vec<ReplayStep> = Vec::new();
    let mut clipped = false;
    let mut perturbation_norm_sum = 0.0;

    let (status, iterations) = loop {
        let n = state.n;
        if n % check_period == 0 && problem.is_feasible(&state.x, cfg.tolerance) {
            break (RunStatus::Feasible, n);
        }
        if n >= cfg.max_iter {
            break (RunStatus::IterationCapReached, n);
        }
        let (record, detail) = step_full(&mut state, problem, cfg)?;
        perturbation_norm_sum += record.b_norm;
        clipped |= detail.clipped;
        steps.push(ReplayStep {
            j: record.j,
            lambda: record.active.then_some(record.lambda),
            b_tilde: detail.b_tilde,
        });
        iterates.push(state.x.clone());
    };

    let result = RunResult {
        status,
        iterations,
        final_point: state.x.clone(),
        residuals: problem.residuals(&state.x),
        perturbation_norm_sum,
        trace: None,
    };

    if clipped || steps.is_empty() {
        return Ok((
            result,
            EquivalenceReport {
                clipped,
                steps_compared: 0,
                max_deviation: if clipped { f64::NAN } else { 0.0 },
            },
        ));
    }

    let mut z = reapply(problem, &steps[0], &iterates[0], 0)?;
    let mut max_deviation: f64 = 0.0;
    for n in 0..steps.len() {
        let w = match &steps[n].b_tilde {
            Some(b) => axpy(1.0, b, &z),
            None => z.clone(),
        };
        max_deviation = max_deviation.max(dist(&iterates[n + 1], &w));
        if n + 1 < steps.len() {
            z = reapply(problem, &steps[n + 1], &w, (n + 1) as u64)?;
        }
    }

    Ok((
        result,
        EquivalenceReport {
            clipped: false,
            steps_compared: steps.len(),
            max_deviation,
        },
    ))
}

/// Finds an approximate constrained minimizer by feasibility seeking.
///
/// Prepends the constraint `f - alpha` to the given constraint oracles and
/// solves the resulting feasibility problem over `omega` from `x0`. When
/// `alpha` upper-bounds the constrained infimum of `f` (the caller's
/// responsibility), the feasible set is nonempty and a feasible result
/// satisfies `f(x) <= alpha + cfg.tolerance` along with every constraint;
/// an `alpha` below the infimum makes the problem infeasible and the run
/// ends at the iteration cap.
///
/// # Errors
///
/// As for [`Problem::new`] and [`solve`].
pub fn approximate_minimize<F>(
    f: F,
    alpha: f64,
    constraints: Vec<Box<dyn ZeroConvexOracle>>,
    omega: BoxRegion,
    x0: Vector,
    cfg: &SolverConfig,
) -> Result<RunResult, SolverError>
where
    F: ZeroConvexOracle + crate::zero_convex::SublevelProjector + 'static,
{
    let shifted = crate::zero_convex::shift_for_minimization(f, alpha);
    let mut oracles: Vec<Box<dyn ZeroConvexOracle>> = vec![Box::new(shifted)];
    oracles.extend(constraints);
    let problem = Problem::new(oracles, omega, x0)?;
    solve(&problem, cfg)
}
