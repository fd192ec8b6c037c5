//! Runtime self-check suites: zero-convexity of the scenario functions,
//! the Fejer decrease of perturbed runs, and inner/outer perturbation
//! equivalence.
//!
//! Each suite returns one [`CheckResult`] per named check; the CLI
//! prints them as `PASS`/`FAIL` lines and exits nonzero on any failure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use zcssp::linalg::{axpy, norm};
use zcssp::solver::{
    fejer_check, perturbation_sum_bound, solve_inner_perturbed, solve_traced, ControlMode,
    Problem, RelaxationSchedule, RunStatus, SolverConfig,
};
use zcssp::voronoi::{
    BallConstraintFunction, BallShiftedVoronoiFunction, HalfSpaceFunction, VoronoiFunction,
};
use zcssp::zero_convex::{verify_zero_convexity, UniformBoundCertificate, ZeroConvexOracle};
use zcssp::{BoxRegion, Vector};

use crate::scenario::{build_problem, builtin_scenario, random_scenario, Scenario};

/// Tolerance for the pointwise zero-convexity inequality.
const ORACLE_TOL: f64 = 1e-9;
/// Box draws per function instance when sampling check points.
const DRAWS_PER_INSTANCE: usize = 400;
/// Minimum accepted sublevel samples for a meaningful inequality check.
const MIN_SAMPLES: usize = 10;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    /// Check name, stable across runs.
    pub name: String,
    /// Whether the check passed.
    pub pass: bool,
    /// Human-readable summary (worst violation, counts, and so on).
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// True when every check in the slice passed.
pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}

/// Which suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Zero-convexity inequality and subgradient norm certificates.
    Oracle,
    /// Fejer decrease and perturbation budget of traced runs.
    Fejer,
    /// Inner/outer perturbation equivalence.
    Equivalence,
    /// All of the above.
    All,
}

/// Runs the chosen suite with a base seed for the sampling RNG.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckResult> {
    match suite {
        Suite::Oracle => oracle_suite(seed),
        Suite::Fejer => fejer_suite(seed),
        Suite::Equivalence => equivalence_suite(seed),
        Suite::All => {
            let mut results = oracle_suite(seed);
            results.extend(fejer_suite(seed));
            results.extend(equivalence_suite(seed));
            results
        }
    }
}

fn draw_box_point(omega: &BoxRegion, rng: &mut ChaCha8Rng) -> Vector {
    let coords: Vec<f64> = omega
        .lower()
        .iter()
        .zip(omega.upper().iter())
        .map(|(&lo, &hi)| rng.gen_range(lo..hi))
        .collect();
    Vector::new(coords).expect("uniform draws are finite")
}

fn draw_ball_point(center: &Vector, radius: f64, rng: &mut ChaCha8Rng) -> Vector {
    let dim = center.dim();
    loop {
        let gauss: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let gauss = Vector::new(gauss).expect("gaussian draws are finite");
        let len = norm(&gauss);
        if len == 0.0 {
            continue;
        }
        let r = radius * rng.gen_range(0.0_f64..1.0).powf(1.0 / dim as f64);
        return axpy(r / len, &gauss, center);
    }
}

/// Checks one function instance: the inequality on sampled points plus
/// the norm certificate on active points. Returns
/// `(worst_violation, samples_used, certificate_breaches)` or a failure
/// message.
fn check_instance<O: ZeroConvexOracle + ?Sized>(
    oracle: &O,
    certificate: &UniformBoundCertificate,
    omega: &BoxRegion,
    extra_samples: &[Vector],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, usize, usize), String> {
    let test_points: Vec<Vector> = (0..DRAWS_PER_INSTANCE)
        .map(|_| draw_box_point(omega, rng))
        .collect();
    let mut samples: Vec<Vector> = test_points
        .iter()
        .filter(|x| oracle.eval(x) <= 0.0)
        .cloned()
        .collect();
    samples.extend(
        extra_samples
            .iter()
            .filter(|x| oracle.eval(x) <= 0.0)
            .cloned(),
    );
    if samples.len() < MIN_SAMPLES {
        return Err(format!(
            "only {} sublevel samples for '{}'; need {}",
            samples.len(),
            oracle.label(),
            MIN_SAMPLES
        ));
    }
    let mut breaches = 0usize;
    for y in &test_points {
        if oracle.eval(y) > 0.0 {
            let t = oracle.zero_subgradient(y);
            if !certificate.admits(&t) {
                breaches += 1;
            }
        }
    }
    let report = verify_zero_convexity(oracle, &samples, &test_points, ORACLE_TOL);
    if !report.passed() {
        return Err(format!(
            "inequality violated for '{}': worst violation {:.3e}",
            oracle.label(),
            report.worst_violation
        ));
    }
    Ok((report.worst_violation, samples.len(), breaches))
}

/// Aggregates instance checks into one named family result.
fn family_result(
    name: &str,
    outcomes: Vec<Result<(f64, usize, usize), String>>,
) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    let mut total_samples = 0usize;
    let mut breaches = 0usize;
    for outcome in &outcomes {
        match outcome {
            Ok((violation, samples, b)) => {
                worst = worst.max(*violation);
                total_samples += samples;
                breaches += b;
            }
            Err(message) => {
                return CheckResult::new(name, false, message.clone());
            }
        }
    }
    if breaches > 0 {
        return CheckResult::new(
            name,
            false,
            format!("{breaches} subgradients exceeded the norm certificate"),
        );
    }
    CheckResult::new(
        name,
        true,
        format!(
            "{} instances, {} sublevel samples, worst violation {:.3e}",
            outcomes.len(),
            total_samples,
            worst
        ),
    )
}

fn scenario_oracle_checks(
    prefix: &str,
    scenario: &Scenario,
    rng: &mut ChaCha8Rng,
) -> Vec<CheckResult> {
    let omega = &scenario.omega;
    let shift = scenario.shift();
    let no_extra: Vec<Vector> = Vec::new();

    let water = scenario
        .water_sites
        .iter()
        .map(|site| {
            let oracle = HalfSpaceFunction::new(scenario.p.clone(), site.clone())
                .map_err(|e| e.to_string())?;
            check_instance(&oracle, &oracle.certificate(), omega, &no_extra, rng)
        })
        .collect();

    let carbon = scenario
        .ca_sites
        .iter()
        .map(|site| {
            let oracle =
                BallShiftedVoronoiFunction::new(scenario.p.clone(), site.clone(), shift)
                    .map_err(|e| e.to_string())?;
            check_instance(&oracle, &oracle.certificate(), omega, &no_extra, rng)
        })
        .collect();

    // Probe balls occupy a small volume fraction in high dimension, so
    // augment the rejection samples with direct in-ball draws.
    let probe_centers = [
        scenario.p.clone(),
        scenario.ca_sites[scenario.probe_center_index].clone(),
    ];
    let probes = probe_centers
        .iter()
        .map(|center| {
            let oracle = BallConstraintFunction::new(center.clone(), scenario.rho)
                .map_err(|e| e.to_string())?;
            let in_ball: Vec<Vector> = (0..DRAWS_PER_INSTANCE)
                .map(|_| draw_ball_point(center, scenario.rho, rng))
                .collect();
            check_instance(&oracle, &oracle.certificate(), omega, &in_ball, rng)
        })
        .collect();

    // The plain equal-weight cell function over all sites, for coverage
    // of the nearest-site selection.
    let all_sites: Vec<Vector> = scenario
        .water_sites
        .iter()
        .chain(scenario.ca_sites.iter())
        .cloned()
        .collect();
    let plain = vec![VoronoiFunction::new(scenario.p.clone(), all_sites)
        .map_err(|e| e.to_string())
        .and_then(|oracle| {
            check_instance(&oracle, &oracle.certificate(), omega, &no_extra, rng)
        })];

    vec![
        family_result(&format!("{prefix}/water-half-spaces"), water),
        family_result(&format!("{prefix}/carbon-weighted-cells"), carbon),
        family_result(&format!("{prefix}/probe-balls"), probes),
        family_result(&format!("{prefix}/plain-voronoi-cell"), plain),
    ]
}

/// Zero-convexity inequality and norm certificates for every scenario
/// function family, on the builtin geometry and a random 7-dimensional
/// one.
pub fn oracle_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = scenario_oracle_checks("builtin", &builtin_scenario(), &mut rng);
    results.extend(scenario_oracle_checks(
        "random-dim7",
        &random_scenario(7, seed),
        &mut rng,
    ));
    results
}

fn perturbed_config(seed: u64, control: ControlMode, relaxation: RelaxationSchedule) -> SolverConfig {
    let mut cfg = SolverConfig::new(0.5, 0.5);
    cfg.relaxation = relaxation;
    cfg.control = control;
    cfg.perturb = true;
    cfg.seed = seed;
    cfg
}

fn fejer_case(
    name: &str,
    problem: &Problem,
    cfg: &SolverConfig,
) -> Vec<CheckResult> {
    let result = match solve_traced(problem, cfg) {
        Ok(result) => result,
        Err(e) => return vec![CheckResult::new(name, false, format!("solver error: {e}"))],
    };
    if result.status != RunStatus::Feasible {
        return vec![CheckResult::new(
            name,
            false,
            format!("run hit the iteration cap at {}", result.iterations),
        )];
    }
    let trace = result.trace.as_ref().expect("traced run records a trace");
    let reference = &result.final_point;
    let mut results = Vec::new();
    match fejer_check(problem, trace, reference, cfg) {
        Ok(report) => {
            results.push(CheckResult::new(
                format!("{name}/decrease"),
                report.pass,
                format!(
                    "{} steps, worst violation {:.3e}",
                    report.steps_checked, report.worst_violation
                ),
            ));
        }
        Err(e) => {
            results.push(CheckResult::new(
                format!("{name}/decrease"),
                false,
                format!("check rejected: {e}"),
            ));
        }
    }
    let mu = cfg.resolved_mu(problem.omega());
    let bound = perturbation_sum_bound(problem.x0(), reference, mu);
    let sum = result.perturbation_norm_sum;
    results.push(CheckResult::new(
        format!("{name}/perturbation-budget"),
        sum <= bound,
        format!("sum of perturbation norms {sum:.3e} against budget {bound:.3e}"),
    ));
    results
}

/// Fejer decrease and perturbation budget on perturbed runs of the
/// builtin scenario under cyclic and almost-cyclic control.
pub fn fejer_suite(seed: u64) -> Vec<CheckResult> {
    let scenario = builtin_scenario();
    let problem = match build_problem(&scenario) {
        Ok(problem) => problem,
        Err(e) => {
            return vec![CheckResult::new(
                "fejer/builtin",
                false,
                format!("scenario error: {e}"),
            )]
        }
    };
    let mut results = fejer_case(
        "fejer/cyclic",
        &problem,
        &perturbed_config(seed, ControlMode::Cyclic, RelaxationSchedule::ConstMid),
    );
    results.extend(fejer_case(
        "fejer/almost-cyclic",
        &problem,
        &perturbed_config(
            seed.wrapping_add(1),
            ControlMode::AlmostCyclicRandom,
            RelaxationSchedule::UniformRandom,
        ),
    ));
    results
}

fn equivalence_case(name: &str, problem: &Problem, cfg: &SolverConfig) -> CheckResult {
    match solve_inner_perturbed(problem, cfg) {
        Ok((result, report)) => {
            if report.clipped {
                return CheckResult::new(
                    name,
                    false,
                    "box projection clipped an iterate; pick an interior start".to_owned(),
                );
            }
            CheckResult::new(
                name,
                report.holds(),
                format!(
                    "{} steps compared over {} iterations, max deviation {:.3e}",
                    report.steps_compared, result.iterations, report.max_deviation
                ),
            )
        }
        Err(e) => CheckResult::new(name, false, format!("solver error: {e}")),
    }
}

/// Inner/outer perturbation equivalence on interior-start runs of the
/// builtin scenario.
pub fn equivalence_suite(seed: u64) -> Vec<CheckResult> {
    let mut scenario = builtin_scenario();
    // An interior start keeps the box projection inactive, the regime
    // where the two recursions coincide.
    scenario.x0 = Vector::new(vec![3.0, 2.5, 3.0]).expect("literal coordinates are finite");
    let problem = match build_problem(&scenario) {
        Ok(problem) => problem,
        Err(e) => {
            return vec![CheckResult::new(
                "equivalence/builtin",
                false,
                format!("scenario error: {e}"),
            )]
        }
    };
    vec![
        equivalence_case(
            "equivalence/cyclic",
            &problem,
            &perturbed_config(seed, ControlMode::Cyclic, RelaxationSchedule::ConstMid),
        ),
        equivalence_case(
            "equivalence/random-control",
            &problem,
            &perturbed_config(
                seed.wrapping_add(1),
                ControlMode::PureRandom,
                RelaxationSchedule::UniformRandom,
            ),
        ),
    ]
}

