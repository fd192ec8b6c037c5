//! A small flat configuration format for batch table runs.
//!
//! A table config is a sequence of `key = value` lines. Assignments
//! before the first `[row]` header set table-wide defaults; each `[row]`
//! starts a new experiment row that inherits the defaults and may
//! override any key. `#` starts a comment anywhere on a line.
//!
//! Keys:
//!
//! * `scenario`: `builtin` or `random`
//! * `dim`: ambient dimension for random scenarios
//! * `x0`: comma-separated start point (builtin scenario only)
//! * `rho`: probe radius
//! * `eps1`, `eps2`: relaxation margins
//! * `lambda`: a number, or `random` for uniform draws from
//!   `[eps1, 2 - eps2]`
//! * `control`: `c`/`cyclic`, `ac`/`almost_cyclic`, or `r`/`random`
//! * `perturb`: `yes` or `no`
//! * `repeats`: trials per row (default 10)
//! * `seed`, `max_iter`, `tolerance`, `check_period`
//! * `allow_eps_sum_violation`: `yes` to run rows outside the
//!   convergence guarantee

use thiserror::Error;

use zcssp::solver::{ControlMode, RelaxationSchedule, SolverConfig};
use zcssp::Vector;

use crate::experiment::ScenarioSource;
use crate::scenario::{builtin_scenario, DEFAULT_RHO};

/// Errors from parsing a table configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// A line is neither a comment, a section header, nor `key = value`.
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax {
        /// 1-based line number.
        line: usize,
        /// The offending text.
        text: String,
    },
    /// A section header other than `[row]`.
    #[error("line {line}: unknown section `{text}` (only `[row]` is recognized)")]
    UnknownSection {
        /// 1-based line number.
        line: usize,
        /// The header text.
        text: String,
    },
    /// An unrecognized key.
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey {
        /// 1-based line number.
        line: usize,
        /// The key.
        key: String,
    },
    /// A value that does not parse for its key.
    #[error("line {line}: invalid value `{value}` for `{key}`: {message}")]
    InvalidValue {
        /// 1-based line number.
        line: usize,
        /// The key.
        key: String,
        /// The raw value text.
        value: String,
        /// What was expected.
        message: String,
    },
    /// The config defines no rows.
    #[error("config defines no `[row]` sections")]
    NoRows,
    /// A row's resolved settings are inconsistent.
    #[error("row {row}: {message}")]
    Row {
        /// 1-based row number.
        row: usize,
        /// What is inconsistent.
        message: String,
    },
}

/// Relaxation choice as written in a config.
#[derive(Debug, Clone)]
enum Lambda {
    Const(f64),
    Random,
}

/// One key set, either the table defaults or a row's overrides applied
/// to them.
#[derive(Debug, Clone)]
struct Settings {
    random_scenario: bool,
    dim: usize,
    x0: Option<Vec<f64>>,
    rho: f64,
    eps1: f64,
    eps2: f64,
    lambda: Lambda,
    lambda_label: String,
    control: ControlMode,
    perturb: bool,
    repeats: u64,
    seed: u64,
    max_iter: Option<u64>,
    tolerance: Option<f64>,
    check_period: Option<u64>,
    allow_eps_sum_violation: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            random_scenario: false,
            dim: 3,
            x0: None,
            rho: DEFAULT_RHO,
            eps1: 1.0,
            eps2: 1.0,
            lambda: Lambda::Const(1.0),
            lambda_label: "1".to_owned(),
            control: ControlMode::Cyclic,
            perturb: false,
            repeats: 10,
            seed: 0,
            max_iter: None,
            tolerance: None,
            check_period: None,
            allow_eps_sum_violation: false,
        }
    }
}

/// One fully resolved experiment row.
#[derive(Debug, Clone)]
pub struct TableSpec {
    /// 1-based row number.
    pub id: usize,
    /// Scenario the row solves.
    pub source: ScenarioSource,
    /// Ambient dimension.
    pub dim: usize,
    /// Probe radius.
    pub rho: f64,
    /// Solver configuration (seed is the base; trials offset it).
    pub cfg: SolverConfig,
    /// Trials to run.
    pub repeats: u64,
    /// The `lambda` value as written, for table output.
    pub lambda_label: String,
    /// Canonical control label: `c`, `ac`, or `r`.
    pub control_label: String,
    /// Whether perturbations are on, for table output.
    pub perturb: bool,
}

fn parse_control(value: &str) -> Option<ControlMode> {
    match value {
        "c" | "cyclic" => Some(ControlMode::Cyclic),
        "ac" | "almost_cyclic" | "almost-cyclic" | "almost_cyclic_random" => {
            Some(ControlMode::AlmostCyclicRandom)
        }
        "r" | "random" | "pure_random" | "pure-random" => Some(ControlMode::PureRandom),
        _ => None,
    }
}

fn parse_yes_no(value: &str) -> Option<bool> {
    match value {
        "yes" | "true" | "on" => Some(true),
        "no" | "false" | "off" => Some(false),
        _ => None,
    }
}

fn control_label(mode: ControlMode) -> &'static str {
    match mode {
        ControlMode::Cyclic => "c",
        ControlMode::AlmostCyclicRandom => "ac",
        ControlMode::PureRandom => "r",
    }
}

fn apply_key(
    settings: &mut Settings,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ConfigError> {
    let invalid = |message: &str| ConfigError::InvalidValue {
        line,
        key: key.to_owned(),
        value: value.to_owned(),
        message: message.to_owned(),
    };
    match key {
        "scenario" => match value {
            "builtin" => settings.random_scenario = false,
            "random" => settings.random_scenario = true,
            _ => return Err(invalid("expected `builtin` or `random`")),
        },
        "dim" => {
            settings.dim = value.parse().map_err(|_| invalid("expected an integer"))?;
        }
        "x0" => {
            let coords: Result<Vec<f64>, _> =
                value.split(',').map(|c| c.trim().parse::<f64>()).collect();
            settings.x0 =
                Some(coords.map_err(|_| invalid("expected comma-separated numbers"))?);
        }
        "rho" => settings.rho = value.parse().map_err(|_| invalid("expected a number"))?,
        "eps1" => settings.eps1 = value.parse().map_err(|_| invalid("expected a number"))?,
        "eps2" => settings.eps2 = value.parse().map_err(|_| invalid("expected a number"))?,
        "lambda" => {
            settings.lambda = if value == "random" {
                Lambda::Random
            } else {
                Lambda::Const(value.parse().map_err(|_| invalid("expected a number or `random`"))?)
            };
            settings.lambda_label = value.to_owned();
        }
        "control" => {
            settings.control =
                parse_control(value).ok_or_else(|| invalid("expected `c`, `ac`, or `r`"))?;
        }
        "perturb" => {
            settings.perturb = parse_yes_no(value).ok_or_else(|| invalid("expected `yes` or `no`"))?;
        }
        "repeats" => {
            let repeats: u64 = value.parse().map_err(|_| invalid("expected an integer"))?;
            if repeats == 0 {
                return Err(invalid("expected at least one trial"));
            }
            settings.repeats = repeats;
        }
        "seed" => settings.seed = value.parse().map_err(|_| invalid("expected an integer"))?,
        "max_iter" => {
            settings.max_iter =
                Some(value.parse().map_err(|_| invalid("expected an integer"))?);
        }
        "tolerance" => {
            settings.tolerance = Some(value.parse().map_err(|_| invalid("expected a number"))?);
        }
        "check_period" => {
            settings.check_period =
                Some(value.parse().map_err(|_| invalid("expected an integer"))?);
        }
        "allow_eps_sum_violation" => {
            settings.allow_eps_sum_violation =
                parse_yes_no(value).ok_or_else(|| invalid("expected `yes` or `no`"))?;
        }
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_owned(),
            })
        }
    }
    Ok(())
}

fn into_spec(settings: Settings, id: usize) -> Result<TableSpec, ConfigError> {
    let row_err = |message: String| ConfigError::Row { row: id, message };
    let source = if settings.random_scenario {
        if settings.x0.is_some() {
            return Err(row_err("x0 applies only to the builtin scenario".to_owned()));
        }
        if settings.dim < 2 {
            return Err(row_err(format!(
                "random scenarios need dim >= 2, got {}",
                settings.dim
            )));
        }
        ScenarioSource::Random {
            dim: settings.dim,
            rho: settings.rho,
        }
    } else {
        let mut scenario = builtin_scenario();
        scenario.rho = settings.rho;
        if let Some(coords) = settings.x0 {
            if coords.len() != scenario.dim {
                return Err(row_err(format!(
                    "x0 has {} coordinates, scenario has dimension {}",
                    coords.len(),
                    scenario.dim
                )));
            }
            scenario.x0 = Vector::new(coords)
                .map_err(|e| row_err(format!("invalid x0: {e}")))?;
        }
        ScenarioSource::Fixed(scenario)
    };
    let dim = if settings.random_scenario { settings.dim } else { 3 };
    let mut cfg = SolverConfig::new(settings.eps1, settings.eps2);
    cfg.relaxation = match settings.lambda {
        Lambda::Const(v) => RelaxationSchedule::ConstExplicit(v),
        Lambda::Random => RelaxationSchedule::UniformRandom,
    };
    cfg.control = settings.control;
    cfg.perturb = settings.perturb;
    cfg.seed = settings.seed;
    cfg.allow_eps_sum_violation = settings.allow_eps_sum_violation;
    if let Some(max_iter) = settings.max_iter {
        cfg.max_iter = max_iter;
    }
    if let Some(tolerance) = settings.tolerance {
        cfg.tolerance = tolerance;
    }
    cfg.check_period = settings.check_period;
    Ok(TableSpec {
        id,
        source,
        dim,
        rho: settings.rho,
        cfg,
        repeats: settings.repeats,
        lambda_label: settings.lambda_label,
        control_label: control_label(settings.control).to_owned(),
        perturb: settings.perturb,
    })
}

/// Parses a table configuration.
///
/// # Errors
///
/// Lexical and value errors carry 1-based line numbers; row consistency
/// errors carry the row number; [`ConfigError::NoRows`] when no `[row]`
/// section appears.
pub fn parse_config(text: &str) -> Result<Vec<TableSpec>, ConfigError> {
    let mut defaults = Settings::default();
    let mut rows: Vec<Settings> = Vec::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let stripped = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') {
            if trimmed == "[row]" {
                rows.push(defaults.clone());
                continue;
            }
            return Err(ConfigError::UnknownSection {
                line,
                text: trimmed.to_owned(),
            });
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: trimmed.to_owned(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let target = rows.last_mut().unwrap_or(&mut defaults);
        apply_key(target, line, &key, value)?;
    }
    if rows.is_empty() {
        return Err(ConfigError::NoRows);
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, settings)| into_spec(settings, i + 1))
        .collect()
}
