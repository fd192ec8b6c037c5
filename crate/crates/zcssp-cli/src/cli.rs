//! Command-line interface of the `zcssp` binary.
//!
//! Subcommands: `solve` runs one scenario and prints the outcome,
//! `table` runs a batch config and writes a CSV table, `verify` runs
//! the self-check suites, and `scenario` prints a scenario's geometry.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use zcssp::solver::{
    solve, solve_traced, ControlMode, RelaxationSchedule, RunStatus, SolverConfig,
    DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use zcssp::Vector;

use crate::config::parse_config;
use crate::experiment::{run_experiment, TableRow};
use crate::scenario::{build_problem, builtin_scenario, random_scenario, Scenario, DEFAULT_RHO};
use crate::verify::{all_passed, run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "zcssp",
    version,
    about = "Feasibility solver for zero-convex constraints, with the \
             molecular Voronoi-cell experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the outcome.
    Solve(SolveArgs),
    /// Run the rows of a batch config and emit a CSV table.
    Table(TableArgs),
    /// Run the runtime self-check suites.
    Verify(VerifyArgs),
    /// Print a scenario's geometry and constraint list.
    Scenario(ScenarioArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioKind {
    /// The fixed two-sided 3D arrangement.
    Builtin,
    /// Sites drawn uniformly from the box.
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControlArg {
    /// Cyclic sweeps: j = n mod m.
    #[value(alias = "cyclic")]
    C,
    /// Almost cyclic: random bit pattern alternating with its complement.
    #[value(alias = "almost-cyclic")]
    Ac,
    /// Independent uniform draws.
    #[value(alias = "random")]
    R,
}

impl From<ControlArg> for ControlMode {
    fn from(arg: ControlArg) -> ControlMode {
        match arg {
            ControlArg::C => ControlMode::Cyclic,
            ControlArg::Ac => ControlMode::AlmostCyclicRandom,
            ControlArg::R => ControlMode::PureRandom,
        }
    }
}

#[derive(Args)]
struct ScenarioSelection {
    /// Which scenario to build.
    #[arg(long, value_enum, default_value = "builtin")]
    scenario: ScenarioKind,
    /// Ambient dimension (random scenario only).
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Probe radius.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    /// Start point as comma-separated coordinates (builtin scenario only).
    #[arg(long, value_parser = parse_point)]
    x0: Option<Vector>,
}

impl ScenarioSelection {
    fn build(&self, seed: u64) -> Result<Scenario, String> {
        let mut scenario = match self.scenario {
            ScenarioKind::Builtin => builtin_scenario(),
            ScenarioKind::Random => {
                if self.dim < 2 {
                    return Err(format!("random scenarios need --dim >= 2, got {}", self.dim));
                }
                if self.x0.is_some() {
                    return Err("--x0 applies only to the builtin scenario".to_owned());
                }
                random_scenario(self.dim, seed)
            }
        };
        scenario.rho = self.rho;
        if let Some(x0) = &self.x0 {
            if x0.dim() != scenario.dim {
                return Err(format!(
                    "--x0 has {} coordinates, scenario has dimension {}",
                    x0.dim(),
                    scenario.dim
                ));
            }
            scenario.x0 = x0.clone();
        }
        Ok(scenario)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    selection: ScenarioSelection,
    /// Lower relaxation margin.
    #[arg(long, default_value_t = 1.0)]
    eps1: f64,
    /// Upper relaxation margin.
    #[arg(long, default_value_t = 1.0)]
    eps2: f64,
    /// Relaxation: a number, or `random` for uniform draws from
    /// [eps1, 2 - eps2].
    #[arg(long, default_value = "1")]
    lambda: String,
    /// Control sequence.
    #[arg(long, value_enum, default_value = "c")]
    control: ControlArg,
    /// Add random perturbations within the admissible budget.
    #[arg(long)]
    perturb: bool,
    /// Seed for all random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: u64,
    /// Feasibility tolerance of the periodic stopping test.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Iterations between stopping tests (default: one sweep, three for
    /// almost-cyclic control).
    #[arg(long)]
    check_period: Option<u64>,
    /// Permit eps1 + eps2 > 2 (outside the convergence guarantee).
    #[arg(long)]
    allow_eps_sum_violation: bool,
    /// Write a per-step CSV trace to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Batch config path.
    config: PathBuf,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print points at full precision instead of three decimals.
    #[arg(long)]
    full_precision: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Oracle,
    Fejer,
    Equivalence,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Seed for the sampling RNG.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    selection: ScenarioSelection,
    /// Seed for the random scenario draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_point(text: &str) -> Result<Vector, String> {
    let coords: Result<Vec<f64>, _> = text.split(',').map(|c| c.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|e| format!("expected comma-separated numbers: {e}"))?;
    Vector::new(coords).map_err(|e| e.to_string())
}

fn parse_lambda(text: &str) -> Result<RelaxationSchedule, String> {
    if text == "random" {
        return Ok(RelaxationSchedule::UniformRandom);
    }
    text.parse::<f64>()
        .map(RelaxationSchedule::ConstExplicit)
        .map_err(|_| format!("--lambda expects a number or `random`, got `{text}`"))
}

fn format_point(point: &Vector) -> String {
    let coords: Vec<String> = point.iter().map(|c| c.to_string()).collect();
    format!("({})", coords.join(", "))
}

fn run_solve(args: &SolveArgs) -> Result<i32, String> {
    let scenario = args.selection.build(args.seed)?;
    let problem = build_problem(&scenario).map_err(|e| e.to_string())?;
    let mut cfg = SolverConfig::new(args.eps1, args.eps2);
    cfg.relaxation = parse_lambda(&args.lambda)?;
    cfg.control = args.control.into();
    cfg.perturb = args.perturb;
    cfg.seed = args.seed;
    cfg.max_iter = args.max_iter;
    cfg.tolerance = args.tolerance;
    cfg.check_period = args.check_period;
    cfg.allow_eps_sum_violation = args.allow_eps_sum_violation;

    let result = if args.trace.is_some() {
        solve_traced(&problem, &cfg)
    } else {
        solve(&problem, &cfg)
    }
    .map_err(|e| e.to_string())?;

    if let Some(path) = &args.trace {
        let trace = result.trace.as_ref().expect("traced run records a trace");
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| format!("cannot write trace to {}: {e}", path.display()))?;
        writer
            .write_record(["n", "j", "oracle", "g", "t_norm", "h", "lambda", "b_norm", "active"])
            .and_then(|()| {
                trace.records.iter().try_for_each(|r| {
                    writer.write_record([
                        r.n.to_string(),
                        r.j.to_string(),
                        problem.oracles()[r.j].label().to_owned(),
                        r.g_val.to_string(),
                        r.t_norm.to_string(),
                        r.h.to_string(),
                        r.lambda.to_string(),
                        r.b_norm.to_string(),
                        if r.active { "1" } else { "0" }.to_owned(),
                    ])
                })
            })
            .and_then(|()| writer.flush().map_err(csv::Error::from))
            .map_err(|e| format!("cannot write trace: {e}"))?;
        eprintln!(
            "wrote {} trace records to {}",
            trace.records.len(),
            path.display()
        );
    }

    let status = match result.status {
        RunStatus::Feasible => "feasible",
        RunStatus::IterationCapReached => "iteration cap reached",
    };
    println!("status: {status}");
    println!("iterations: {}", result.iterations);
    println!("point: {}", format_point(&result.final_point));
    println!("max residual: {:e}", result.max_residual());
    println!(
        "perturbation norm sum: {:e}",
        result.perturbation_norm_sum
    );
    Ok(0)
}

fn run_table(args: &TableArgs) -> Result<i32, String> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let specs = parse_config(&text).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in &specs {
        let stats =
            run_experiment(&spec.source, &spec.cfg, spec.repeats).map_err(|e| {
                format!("row {}: {e}", spec.id)
            })?;
        let row = TableRow::from_stats(spec, &stats);
        eprintln!(
            "row {:>3}: min {} max {} avg {} ({} trials, {} feasible)",
            row.id,
            row.min_iter,
            row.max_iter,
            row.avg_iter,
            stats.trials.len(),
            stats.num_feasible
        );
        rows.push(row);
    }

    let write_rows = |target: &mut dyn Write| -> Result<(), String> {
        let mut writer = csv::Writer::from_writer(target);
        writer
            .write_record(TableRow::csv_header())
            .and_then(|()| {
                rows.iter().try_for_each(|row| {
                    writer.write_record(row.csv_record(args.full_precision))
                })
            })
            .and_then(|()| writer.flush().map_err(csv::Error::from))
            .map_err(|e| format!("cannot write table: {e}"))
    };
    match &args.out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            write_rows(&mut file)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            write_rows(&mut stdout.lock())?;
        }
    }
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> i32 {
    let suite = match args.suite {
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::Fejer => Suite::Fejer,
        SuiteArg::Equivalence => Suite::Equivalence,
        SuiteArg::All => Suite::All,
    };
    let results = run_suite(suite, args.seed);
    for check in &results {
        if check.pass {
            println!("PASS {} ({})", check.name, check.detail);
        } else {
            println!("FAIL {}: {}", check.name, check.detail);
        }
    }
    let failures = results.iter().filter(|c| !c.pass).count();
    println!("{} checks, {} failures", results.len(), failures);
    if all_passed(&results) {
        0
    } else {
        2
    }
}

fn run_scenario(args: &ScenarioArgs) -> Result<i32, String> {
    let scenario = args.selection.build(args.seed)?;
    let problem = build_problem(&scenario).map_err(|e| e.to_string())?;
    println!("dimension: {}", scenario.dim);
    println!("rho: {}", scenario.rho);
    println!(
        "radii: water {} / carbon {} (shift {})",
        scenario.water_radius,
        scenario.ca_radius,
        scenario.shift()
    );
    println!("p: {}", format_point(&scenario.p));
    println!("x0: {}", format_point(&scenario.x0));
    println!("water sites: {}", scenario.water_sites.len());
    for site in &scenario.water_sites {
        println!("  {}", format_point(site));
    }
    println!("carbon sites: {}", scenario.ca_sites.len());
    for (j, site) in scenario.ca_sites.iter().enumerate() {
        let marker = if j == scenario.probe_center_index {
            "  (probe)"
        } else {
            ""
        };
        println!("  {}{marker}", format_point(site));
    }
    println!("constraints: {}", problem.num_functions());
    for oracle in problem.oracles() {
        println!("  {}", oracle.label());
    }
    println!(
        "start residual: {:e}",
        problem.max_residual(&scenario.x0)
    );
    Ok(0)
}

/// Entry point for the `zcssp` binary; returns the process exit code.
///
/// Exit codes: 0 success, 1 usage or runtime error, 2 self-check
/// failure.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Table(args) => run_table(args),
        Command::Verify(args) => Ok(run_verify(args)),
        Command::Scenario(args) => run_scenario(args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}
