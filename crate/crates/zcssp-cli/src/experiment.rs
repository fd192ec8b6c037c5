//! Repeated solver runs with summary statistics, as reported in the
//! reference tables.
//!
//! An experiment is a scenario source plus a solver configuration, run
//! `repeats` times with per-trial seeds `seed, seed + 1, ...`. Random
//! scenario sources redraw the geometry each trial from the same seed
//! as the solver (the two use distinct RNG streams, so they stay
//! independent). Deterministic configurations produce identical trials;
//! callers typically set `repeats = 1` for those.

use rayon::prelude::*;

use zcssp::solver::{solve, Problem, RunStatus, SolverConfig};
use zcssp::Vector;

use crate::config::TableSpec;
use crate::scenario::{build_problem, random_scenario, Scenario, ScenarioError};

/// Where each trial's problem instance comes from.
#[derive(Debug, Clone)]
pub enum ScenarioSource {
    /// Every trial solves this exact scenario.
    Fixed(Scenario),
    /// Every trial draws a fresh random scenario in `dim` dimensions
    /// with probe radius `rho`, seeded by that trial's seed.
    Random {
        /// Ambient dimension of the drawn scenarios.
        dim: usize,
        /// Probe radius to install in each drawn scenario.
        rho: f64,
    },
}

/// Outcome of one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// Trial index, `0..repeats`.
    pub trial: u64,
    /// Number of iterations performed.
    pub iterations: u64,
    /// Whether the trial reached feasibility or hit the iteration cap.
    pub status: RunStatus,
    /// Final iterate of the trial.
    pub final_point: Vector,
}

/// Summary statistics over the trials of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentStats {
    /// Minimum iteration count across trials.
    pub min_iter: u64,
    /// Maximum iteration count across trials.
    pub max_iter: u64,
    /// Mean iteration count across trials.
    pub avg_iter: f64,
    /// Final point of the minimum-iteration trial, if that trial
    /// reached feasibility; `None` when it hit the iteration cap.
    pub min_run_point: Option<Vector>,
    /// Number of trials that reached feasibility.
    pub num_feasible: usize,
    /// Per-trial outcomes in trial order.
    pub trials: Vec<TrialOutcome>,
}

impl ExperimentStats {
    fn from_trials(trials: Vec<TrialOutcome>) -> Self {
        let min = trials
            .iter()
            .min_by_key(|t| t.iterations)
            .expect("at least one trial");
        let min_iter = min.iterations;
        let min_run_point = match min.status {
            RunStatus::Feasible => Some(min.final_point.clone()),
            RunStatus::IterationCapReached => None,
        };
        let max_iter = trials.iter().map(|t| t.iterations).max().expect("nonempty");
        let avg_iter =
            trials.iter().map(|t| t.iterations as f64).sum::<f64>() / trials.len() as f64;
        let num_feasible = trials
            .iter()
            .filter(|t| t.status == RunStatus::Feasible)
            .count();
        ExperimentStats {
            min_iter,
            max_iter,
            avg_iter,
            min_run_point,
            num_feasible,
            trials,
        }
    }

    /// True when every trial reached feasibility.
    pub fn all_feasible(&self) -> bool {
        self.num_feasible == self.trials.len()
    }
}

fn run_trial(
    source: &ScenarioSource,
    fixed_problem: Option<&Problem>,
    cfg: &SolverConfig,
    trial: u64,
) -> Result<TrialOutcome, ScenarioError> {
    let mut trial_cfg = cfg.clone();
    trial_cfg.seed = cfg.seed.wrapping_add(trial);
    let result = match (source, fixed_problem) {
        (_, Some(problem)) => solve(problem, &trial_cfg)?,
        (ScenarioSource::Random { dim, rho }, None) => {
            let mut scenario = random_scenario(*dim, trial_cfg.seed);
            scenario.rho = *rho;
            let problem = build_problem(&scenario)?;
            solve(&problem, &trial_cfg)?
        }
        (ScenarioSource::Fixed(_), None) => unreachable!("fixed source builds its problem once"),
    };
    Ok(TrialOutcome {
        trial,
        iterations: result.iterations,
        status: result.status,
        final_point: result.final_point,
    })
}

/// Runs an experiment: `repeats` trials in parallel, seeds
/// `cfg.seed + trial`.
///
/// # Errors
///
/// Scenario assembly errors, and solver configuration or run errors
/// from any trial.
///
/// # Panics
///
/// Panics if `repeats` is zero.
pub fn run_experiment(
    source: &ScenarioSource,
    cfg: &SolverConfig,
    repeats: u64,
) -> Result<ExperimentStats, ScenarioError> {
    assert!(repeats > 0, "an experiment needs at least one trial");
    let fixed_problem = match source {
        ScenarioSource::Fixed(scenario) => Some(build_problem(scenario)?),
        ScenarioSource::Random { .. } => None,
    };
    let trials: Vec<TrialOutcome> = (0..repeats)
        .into_par_iter()
        .map(|trial| run_trial(source, fixed_problem.as_ref(), cfg, trial))
        .collect::<Result<_, _>>()?;
    Ok(ExperimentStats::from_trials(trials))
}

/// One output row of a batch table, ready for CSV serialization.
#[derive(Debug, Clone)]
pub struct TableRow {
    /// 1-based row number.
    pub id: usize,
    /// Ambient dimension.
    pub dim: usize,
    /// Probe radius.
    pub rho: f64,
    /// Lower relaxation margin.
    pub eps1: f64,
    /// Upper relaxation margin.
    pub eps2: f64,
    /// Relaxation as written in the config (`1.43` or `random`).
    pub lambda: String,
    /// Control label: `c`, `ac`, or `r`.
    pub control: String,
    /// Whether perturbations were on.
    pub perturb: bool,
    /// Minimum iterations across trials.
    pub min_iter: u64,
    /// Maximum iterations across trials.
    pub max_iter: u64,
    /// Mean iterations across trials.
    pub avg_iter: f64,
    /// Final point of the minimum-iteration trial, if feasible.
    pub point: Option<Vector>,
}

impl TableRow {
    /// Combines a row specification with its experiment statistics.
    pub fn from_stats(spec: &TableSpec, stats: &ExperimentStats) -> TableRow {
        TableRow {
            id: spec.id,
            dim: spec.dim,
            rho: spec.rho,
            eps1: spec.cfg.eps1,
            eps2: spec.cfg.eps2,
            lambda: spec.lambda_label.clone(),
            control: spec.control_label.clone(),
            perturb: spec.perturb,
            min_iter: stats.min_iter,
            max_iter: stats.max_iter,
            avg_iter: stats.avg_iter,
            point: stats.min_run_point.clone(),
        }
    }

    /// CSV column names, aligned with [`TableRow::csv_record`].
    pub fn csv_header() -> [&'static str; 14] {
        [
            "no", "dim", "rho", "eps1", "eps2", "lambda", "control", "perturb", "min_iter",
            "max_iter", "avg_iter", "point_x", "point_y", "point_z",
        ]
    }

    /// Serializes the row. Points print their first three coordinates,
    /// rounded to three decimals unless `full_precision`; capped rows
    /// leave the point columns empty.
    pub fn csv_record(&self, full_precision: bool) -> Vec<String> {
        let mut record = vec![
            self.id.to_string(),
            self.dim.to_string(),
            self.rho.to_string(),
            self.eps1.to_string(),
            self.eps2.to_string(),
            self.lambda.clone(),
            self.control.clone(),
            if self.perturb { "yes" } else { "no" }.to_owned(),
            self.min_iter.to_string(),
            self.max_iter.to_string(),
            self.avg_iter.to_string(),
        ];
        for k in 0..3 {
            let cell = match &self.point {
                Some(point) if k < point.dim() => {
                    if full_precision {
                        point[k].to_string()
                    } else {
                        format!("{:.3}", point[k])
                    }
                }
                _ => String::new(),
            };
            record.push(cell);
        }
        record
    }
}
