//! Table configuration parsing and experiment statistics.

use zcssp::linalg::dist;
use zcssp::solver::{
    ControlMode, RelaxationSchedule, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use zcssp::Vector;
use zcssp_cli::config::{parse_config, ConfigError, TableSpec};
use zcssp_cli::experiment::{run_experiment, ScenarioSource, TableRow};
use zcssp_cli::scenario::DEFAULT_RHO;

fn v(coords: &[f64]) -> Vector {
    Vector::new(coords.to_vec()).expect("finite test coordinates")
}

fn parse_one(text: &str) -> TableSpec {
    let mut specs = parse_config(text).expect("config parses");
    assert_eq!(specs.len(), 1);
    specs.pop().expect("one row")
}

#[test]
fn minimal_config_uses_defaults() {
    let spec = parse_one("[row]\n");
    assert_eq!(spec.id, 1);
    assert_eq!(spec.dim, 3);
    assert_eq!(spec.rho, DEFAULT_RHO);
    assert_eq!(spec.repeats, 10);
    assert_eq!(spec.cfg.eps1, 1.0);
    assert_eq!(spec.cfg.eps2, 1.0);
    assert_eq!(spec.cfg.relaxation, RelaxationSchedule::ConstExplicit(1.0));
    assert_eq!(spec.cfg.control, ControlMode::Cyclic);
    assert!(!spec.cfg.perturb);
    assert_eq!(spec.cfg.seed, 0);
    assert_eq!(spec.cfg.max_iter, DEFAULT_MAX_ITER);
    assert_eq!(spec.cfg.tolerance, DEFAULT_TOLERANCE);
    assert_eq!(spec.cfg.check_period, None);
    assert!(!spec.cfg.allow_eps_sum_violation);
    assert_eq!(spec.lambda_label, "1");
    assert_eq!(spec.control_label, "c");
    assert!(matches!(spec.source, ScenarioSource::Fixed(_)));
}

#[test]
fn rows_inherit_the_table_defaults_not_the_previous_row() {
    let text = "\
eps1 = 0.5
eps2 = 0.4
lambda = 1.2

[row]
eps1 = 1.7   # this override applies to row 1 only
eps2 = 0.2
lambda = 1.7

[row]
";
    let specs = parse_config(text).expect("config parses");
    assert_eq!(specs.len(), 2);
    assert_eq!(specs[0].cfg.eps1, 1.7);
    assert_eq!(specs[0].cfg.eps2, 0.2);
    assert_eq!(specs[0].lambda_label, "1.7");
    assert_eq!(specs[1].cfg.eps1, 0.5);
    assert_eq!(specs[1].cfg.eps2, 0.4);
    assert_eq!(specs[1].cfg.relaxation, RelaxationSchedule::ConstExplicit(1.2));
    assert_eq!(specs[1].lambda_label, "1.2");
}

#[test]
fn keys_round_trip_into_the_solver_config() {
    let spec = parse_one(
        "\
[row]
scenario = builtin
x0 = -4, 3.853, -4
rho = 1.5
EPS1 = 0.303
eps2 = 0.57
lambda = 1.43
control = ac
perturb = yes
repeats = 4
seed = 42
max_iter = 1000
tolerance = 1e-7
check_period = 84
allow_eps_sum_violation = yes
",
    );
    assert_eq!(spec.rho, 1.5);
    assert_eq!(spec.cfg.eps1, 0.303);
    assert_eq!(spec.cfg.eps2, 0.57);
    assert_eq!(spec.cfg.relaxation, RelaxationSchedule::ConstExplicit(1.43));
    assert_eq!(spec.cfg.control, ControlMode::AlmostCyclicRandom);
    assert!(spec.cfg.perturb);
    assert_eq!(spec.repeats, 4);
    assert_eq!(spec.cfg.seed, 42);
    assert_eq!(spec.cfg.max_iter, 1000);
    assert_eq!(spec.cfg.tolerance, 1e-7);
    assert_eq!(spec.cfg.check_period, Some(84));
    assert!(spec.cfg.allow_eps_sum_violation);
    assert_eq!(spec.control_label, "ac");
    match &spec.source {
        ScenarioSource::Fixed(scenario) => {
            assert_eq!(scenario.x0, v(&[-4.0, 3.853, -4.0]));
            assert_eq!(scenario.rho, 1.5);
        }
        other => panic!("expected a fixed scenario, got {other:?}"),
    }
}

#[test]
fn control_aliases_and_random_lambda() {
    for alias in ["c", "cyclic"] {
        let spec = parse_one(&format!("[row]\ncontrol = {alias}\n"));
        assert_eq!(spec.cfg.control, ControlMode::Cyclic);
    }
    for alias in ["ac", "almost_cyclic", "almost-cyclic", "almost_cyclic_random"] {
        let spec = parse_one(&format!("[row]\ncontrol = {alias}\n"));
        assert_eq!(spec.cfg.control, ControlMode::AlmostCyclicRandom);
    }
    for alias in ["r", "random", "pure_random", "pure-random"] {
        let spec = parse_one(&format!("[row]\ncontrol = {alias}\n"));
        assert_eq!(spec.cfg.control, ControlMode::PureRandom);
    }
    let spec = parse_one("[row]\nlambda = random\n");
    assert_eq!(spec.cfg.relaxation, RelaxationSchedule::UniformRandom);
    assert_eq!(spec.lambda_label, "random");
}

#[test]
fn random_scenario_rows_carry_dim_and_rho() {
    let spec = parse_one("[row]\nscenario = random\ndim = 100\nrho = 37\n");
    assert_eq!(spec.dim, 100);
    match spec.source {
        ScenarioSource::Random { dim, rho } => {
            assert_eq!(dim, 100);
            assert_eq!(rho, 37.0);
        }
        other => panic!("expected a random source, got {other:?}"),
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    match parse_config("eps1 = 1\njust some text\n") {
        Err(ConfigError::Syntax { line, text }) => {
            assert_eq!(line, 2);
            assert_eq!(text, "just some text");
        }
        other => panic!("expected a syntax error, got {other:?}"),
    }
    match parse_config("[table]\n") {
        Err(ConfigError::UnknownSection { line, .. }) => assert_eq!(line, 1),
        other => panic!("expected an unknown section error, got {other:?}"),
    }
    match parse_config("[row]\nepsilon = 1\n") {
        Err(ConfigError::UnknownKey { line, key }) => {
            assert_eq!(line, 2);
            assert_eq!(key, "epsilon");
        }
        other => panic!("expected an unknown key error, got {other:?}"),
    }
    match parse_config("[row]\n\n# comment\neps1 = fast\n") {
        Err(ConfigError::InvalidValue { line, key, value, .. }) => {
            assert_eq!(line, 4);
            assert_eq!(key, "eps1");
            assert_eq!(value, "fast");
        }
        other => panic!("expected an invalid value error, got {other:?}"),
    }
    assert!(matches!(
        parse_config("[row]\nrepeats = 0\n"),
        Err(ConfigError::InvalidValue { line: 2, .. })
    ));
    assert!(matches!(
        parse_config("[row]\nperturb = maybe\n"),
        Err(ConfigError::InvalidValue { line: 2, .. })
    ));
    assert!(matches!(parse_config("eps1 = 1\n"), Err(ConfigError::NoRows)));
    assert!(matches!(parse_config(""), Err(ConfigError::NoRows)));
}

#[test]
fn row_consistency_errors_name_the_row() {
    match parse_config("[row]\n[row]\nscenario = random\nx0 = 1, 2, 3\n") {
        Err(ConfigError::Row { row, message }) => {
            assert_eq!(row, 2);
            assert!(message.contains("x0"), "message: {message}");
        }
        other => panic!("expected a row error, got {other:?}"),
    }
    assert!(matches!(
        parse_config("[row]\nscenario = random\ndim = 1\n"),
        Err(ConfigError::Row { row: 1, .. })
    ));
    match parse_config("[row]\nx0 = 1, 2\n") {
        Err(ConfigError::Row { row: 1, message }) => {
            assert!(message.contains("2 coordinates"), "message: {message}");
        }
        other => panic!("expected a row error, got {other:?}"),
    }
}

#[test]
fn csv_layout_matches_the_header() {
    assert_eq!(
        TableRow::csv_header(),
        [
            "no", "dim", "rho", "eps1", "eps2", "lambda", "control", "perturb", "min_iter",
            "max_iter", "avg_iter", "point_x", "point_y", "point_z",
        ]
    );
    let row = TableRow {
        id: 13,
        dim: 3,
        rho: 2.0318,
        eps1: 1.0,
        eps2: 1.0,
        lambda: "1".to_owned(),
        control: "c".to_owned(),
        perturb: false,
        min_iter: 4676,
        max_iter: 4676,
        avg_iter: 4676.0,
        point: Some(v(&[-0.0904, 0.39675, 1.50893])),
    };
    let record = row.csv_record(false);
    assert_eq!(record.len(), TableRow::csv_header().len());
    assert_eq!(
        record[..11],
        [
            "13", "3", "2.0318", "1", "1", "1", "c", "no", "4676", "4676", "4676"
        ]
        .map(str::to_owned)
    );
    assert_eq!(record[11..], ["-0.090", "0.397", "1.509"].map(str::to_owned));

    let full = row.csv_record(true);
    assert_eq!(full[11], "-0.0904");
    assert_eq!(full[12], "0.39675");

    // Capped rows have no point; high-dimensional points print their
    // first three coordinates.
    let mut capped = row.clone();
    capped.point = None;
    assert_eq!(capped.csv_record(false)[11..], ["", "", ""].map(str::to_owned));
    let mut wide = row;
    wide.dim = 5;
    wide.point = Some(v(&[1.0, 2.0, 3.0, 4.0, 5.0]));
    let wide_record = wide.csv_record(false);
    assert_eq!(wide_record.len(), 14);
    assert_eq!(wide_record[11..], ["1.000", "2.000", "3.000"].map(str::to_owned));
}

#[test]
fn deterministic_experiment_collapses_to_one_outcome() {
    let spec = parse_one("[row]\nrepeats = 3\n");
    let stats = run_experiment(&spec.source, &spec.cfg, spec.repeats).expect("experiment runs");
    assert!(stats.all_feasible());
    assert_eq!(stats.min_iter, 4676);
    assert_eq!(stats.max_iter, 4676);
    assert_eq!(stats.avg_iter, 4676.0);
    assert_eq!(stats.trials.len(), 3);
    let point = stats.min_run_point.as_ref().expect("feasible min trial");
    assert!(dist(point, &v(&[-0.090, 0.397, 1.509])) <= 0.05);

    let row = TableRow::from_stats(&spec, &stats);
    assert_eq!(row.id, 1);
    assert_eq!(row.min_iter, row.max_iter);
}

#[test]
fn random_experiments_are_seed_deterministic() {
    let text = "[row]\nscenario = random\ndim = 5\nrho = 10\nrepeats = 2\nlambda = random\ncontrol = r\nperturb = yes\n";
    let spec = parse_one(text);
    let stats = run_experiment(&spec.source, &spec.cfg, spec.repeats).expect("experiment runs");
    assert!(stats.all_feasible());
    assert!(stats.min_iter <= stats.max_iter);
    assert!(stats.avg_iter >= stats.min_iter as f64);
    assert!(stats.avg_iter <= stats.max_iter as f64);
    let period = spec.cfg.resolved_check_period(28);
    for trial in &stats.trials {
        assert_eq!(trial.iterations % period, 0);
        assert_eq!(trial.final_point.dim(), 5);
    }

    let again = run_experiment(&spec.source, &spec.cfg, spec.repeats).expect("experiment runs");
    assert_eq!(again.min_iter, stats.min_iter);
    assert_eq!(again.max_iter, stats.max_iter);
    let first = stats.min_run_point.expect("feasible");
    let second = again.min_run_point.expect("feasible");
    assert_eq!(dist(&first, &second), 0.0);
}
