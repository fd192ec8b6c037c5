//! Molecular feasibility scenarios: a probe center inside the Voronoi cell
//! of its molecule.
//!
//! The setting: one molecule sits at `p` surrounded by water molecules
//! (van der Waals radius `r = 1.4`) and alpha-carbon molecules (radius
//! `R = 1.87`) at sites `a_j`. A spherical probe of radius `rho` must
//! touch both the molecule at `p` and a designated alpha carbon `a_l`, and
//! its center must lie in the additively weighted Voronoi cell of `p`.
//! That is a feasibility problem over the box with one constraint per
//! competing molecule plus two ball constraints:
//!
//! * water `j`: the bisector offset `<x - (a_j+p)/2, (a_j-p)/||a_j-p||>`
//!   (equal weights cancel, leaving a plain half-space);
//! * alpha carbon `j`: `d(x, p) - d(x, B_j)` with `B_j` the ball of radius
//!   `R - r` around `a_j` (the weighted cell against a heavier competitor);
//! * `d(x, p) - rho` and `d(x, a_l) - rho` (the probe touches both).
//!
//! [`builtin_scenario`] is the fixed two-sided 3D arrangement with 16
//! water and 10 alpha-carbon sites; [`random_scenario`] draws the sites
//! uniformly from the box in any dimension at least 2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use zcssp::linalg::dist;
use zcssp::solver::{Problem, SolverError, STREAM_SCENARIO};
use zcssp::voronoi::{
    BallConstraintFunction, BallShiftedVoronoiFunction, HalfSpaceFunction, VoronoiError,
};
use zcssp::zero_convex::ZeroConvexOracle;
use zcssp::{BoxRegion, Vector};

/// Van der Waals radius of a water molecule (angstrom).
pub const WATER_RADIUS: f64 = 1.4;
/// Van der Waals radius of an alpha-carbon molecule (angstrom).
pub const CA_RADIUS: f64 = 1.87;
/// Probe radius used by the reference experiments (angstrom).
pub const DEFAULT_RHO: f64 = 2.0318;
/// Half-width of the experiment box `[-4, 4]^dim`.
pub const BOX_HALF_WIDTH: f64 = 4.0;

/// Errors from scenario construction and problem assembly.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// An alpha-carbon site sits too close to `p` for the weight gap.
    #[error(
        "ca site {site_index} at distance {distance} from p violates the \
         weight gap: need shift {shift} < distance"
    )]
    ShiftViolation {
        /// Index into the alpha-carbon site list.
        site_index: usize,
        /// Distance from the site to `p`.
        distance: f64,
        /// The required gap `R - r`.
        shift: f64,
    },
    /// A geometric function family rejected its parameters.
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    /// Problem assembly rejected the pieces.
    #[error(transparent)]
    Solver(#[from] SolverError),
    /// A scenario field is inconsistent.
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// A full experiment description: molecule geometry plus solver start.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Ambient dimension.
    pub dim: usize,
    /// Water molecule sites.
    pub water_sites: Vec<Vector>,
    /// Alpha-carbon molecule sites.
    pub ca_sites: Vec<Vector>,
    /// The own molecule the probe must touch.
    pub p: Vector,
    /// Index into `ca_sites` of the alpha carbon the probe must also
    /// touch.
    pub probe_center_index: usize,
    /// Water van der Waals radius `r`.
    pub water_radius: f64,
    /// Alpha-carbon van der Waals radius `R`.
    pub ca_radius: f64,
    /// Probe radius `rho`.
    pub rho: f64,
    /// The box the iterates live in.
    pub omega: BoxRegion,
    /// Solver starting point.
    pub x0: Vector,
}

impl Scenario {
    /// The additive weight gap `R - r` of the alpha-carbon constraints.
    pub fn shift(&self) -> f64 {
        self.ca_radius - self.water_radius
    }

    /// Total number of constraint functions the scenario induces.
    pub fn num_functions(&self) -> usize {
        self.water_sites.len() + self.ca_sites.len() + 2
    }
}

fn vec3(x: f64, y: f64, z: f64) -> Vector {
    Vector::new(vec![x, y, z]).expect("literal coordinates are finite")
}

/// The fixed two-sided 3D arrangement: 16 water molecules on one side of
/// the box, 10 alpha carbons on the other, `p` at the origin, probe
/// carbon at `(0, 0, 3.5)`, and start `x0 = (4, 3.853, 4)`.
pub fn builtin_scenario() -> Scenario {
    let water_sites = vec![
        vec3(3.5, -3.5, -3.5),
        vec3(3.5, 0.0, -3.5),
        vec3(3.5, 3.5, -3.5),
        vec3(3.5, -3.5, 0.0),
        vec3(3.5, 0.0, 0.0),
        vec3(3.5, 3.5, 0.0),
        vec3(3.5, -3.5, 3.5),
        vec3(3.5, 0.0, 3.5),
        vec3(3.5, 3.5, 3.5),
        vec3(0.0, -3.5, -3.5),
        vec3(0.0, 0.0, -3.5),
        vec3(0.0, 3.5, -3.5),
        vec3(0.0, -3.5, 0.0),
        vec3(0.0, 3.5, 0.0),
        vec3(0.0, -3.5, 3.5),
        vec3(0.0, 3.5, 3.5),
    ];
    let ca_sites = vec![
        vec3(-3.5, -3.5, -3.5),
        vec3(-3.5, 0.0, -3.5),
        vec3(-3.5, 3.5, -3.5),
        vec3(-3.5, -3.5, 0.0),
        vec3(-3.5, 0.0, 0.0),
        vec3(-3.5, 3.5, 0.0),
        vec3(-3.5, -3.5, 3.5),
        vec3(-3.5, 0.0, 3.5),
        vec3(-3.5, 3.5, 3.5),
        vec3(0.0, 0.0, 3.5),
    ];
    Scenario {
        dim: 3,
        water_sites,
        ca_sites,
        p: vec3(0.0, 0.0, 0.0),
        probe_center_index: 9,
        water_radius: WATER_RADIUS,
        ca_radius: CA_RADIUS,
        rho: DEFAULT_RHO,
        omega: BoxRegion::centered_cube(3, BOX_HALF_WIDTH),
        x0: vec3(4.0, 3.853, 4.0),
    }
}

/// A random scenario in `dim` dimensions, deterministic given the seed.
///
/// The box is `[-4, 4]^dim` and `p` is the origin. All 26 sites (16
/// water, 10 alpha carbon) are uniform over the box, alpha-carbon sites
/// resampled until they clear the weight gap from `p`; the probe carbon
/// is the last alpha-carbon site drawn, and the start `x0` is drawn
/// uniformly from the box after the sites. The draw order (water sites,
/// then carbon sites, then `x0`, coordinates in order) is part of the
/// determinism contract.
///
/// # Panics
///
/// Panics if `dim < 2`.
pub fn random_scenario(dim: usize, seed: u64) -> Scenario {
    assert!(dim >= 2, "random scenarios need dimension at least 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_SCENARIO);
    let omega = BoxRegion::centered_cube(dim, BOX_HALF_WIDTH);
    let p = Vector::zeros(dim);
    let shift = CA_RADIUS - WATER_RADIUS;

    let draw = |rng: &mut ChaCha8Rng| -> Vector {
        Vector::new(
            (0..dim)
                .map(|_| rng.gen_range(-BOX_HALF_WIDTH..BOX_HALF_WIDTH))
                .collect(),
        )
        .expect("uniform draws are finite")
    };

    let mut water_sites = Vec::with_capacity(16);
    while water_sites.len() < 16 {
        let site = draw(&mut rng);
        if dist(&site, &p) > 0.0 {
            water_sites.push(site);
        }
    }
    let mut ca_sites = Vec::with_capacity(10);
    while ca_sites.len() < 10 {
        let site = draw(&mut rng);
        if dist(&site, &p) > shift {
            ca_sites.push(site);
        }
    }
    let x0 = draw(&mut rng);

    Scenario {
        dim,
        water_sites,
        ca_sites,
        p,
        probe_center_index: 9,
        water_radius: WATER_RADIUS,
        ca_radius: CA_RADIUS,
        rho: DEFAULT_RHO,
        omega,
        x0,
    }
}

/// Assembles the feasibility problem a scenario describes.
///
/// Constraint order: water half-spaces in site order, alpha-carbon
/// weighted cells in site order, then the two probe ball constraints
/// (around `p`, then around the probe carbon).
///
/// # Errors
///
/// [`ScenarioError::ShiftViolation`] naming the first alpha-carbon site
/// inside the weight gap; [`ScenarioError::Invalid`] for inconsistent
/// fields; construction errors from the function families and
/// [`Problem::new`] otherwise.
pub fn build_problem(scenario: &Scenario) -> Result<Problem, ScenarioError> {
    if scenario.probe_center_index >= scenario.ca_sites.len() {
        return Err(ScenarioError::Invalid(format!(
            "probe_center_index {} out of range for {} ca sites",
            scenario.probe_center_index,
            scenario.ca_sites.len()
        )));
    }
    if !(scenario.ca_radius > scenario.water_radius && scenario.water_radius > 0.0) {
        return Err(ScenarioError::Invalid(format!(
            "need R > r > 0, got R = {}, r = {}",
            scenario.ca_radius, scenario.water_radius
        )));
    }
    let shift = scenario.shift();
    let mut oracles: Vec<Box<dyn ZeroConvexOracle>> =
        Vec::with_capacity(scenario.num_functions());
    for (j, site) in scenario.water_sites.iter().enumerate() {
        let oracle = HalfSpaceFunction::new(scenario.p.clone(), site.clone())?
            .with_label(format!("water[{j}]"));
        oracles.push(Box::new(oracle));
    }
    for (j, site) in scenario.ca_sites.iter().enumerate() {
        let distance = dist(site, &scenario.p);
        if distance <= shift {
            return Err(ScenarioError::ShiftViolation {
                site_index: j,
                distance,
                shift,
            });
        }
        let oracle = BallShiftedVoronoiFunction::new(scenario.p.clone(), site.clone(), shift)?
            .with_label(format!("ca[{j}]"));
        oracles.push(Box::new(oracle));
    }
    oracles.push(Box::new(
        BallConstraintFunction::new(scenario.p.clone(), scenario.rho)?.with_label("probe(p)"),
    ));
    let probe_site = scenario.ca_sites[scenario.probe_center_index].clone();
    oracles.push(Box::new(
        BallConstraintFunction::new(probe_site, scenario.rho)?.with_label("probe(ca)"),
    ));
    Ok(Problem::new(
        oracles,
        scenario.omega.clone(),
        scenario.x0.clone(),
    )?)
}
