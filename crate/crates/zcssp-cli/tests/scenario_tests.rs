//! Scenario construction and reproduction of the reference run.

use zcssp::solver::{solve, ControlMode, RelaxationSchedule, RunStatus, SolverConfig};
use zcssp_cli::scenario::{build_problem, builtin_scenario};

#[test]
fn builtin_scenario_shape() {
    let s = builtin_scenario();
    assert_eq!(s.dim, 3);
    assert_eq!(s.water_sites.len(), 16);
    assert_eq!(s.ca_sites.len(), 10);
    assert_eq!(s.num_functions(), 28);
    assert_eq!(s.ca_sites[s.probe_center_index].as_slice(), &[0.0, 0.0, 3.5]);
    let problem = build_problem(&s).expect("builtin scenario is well formed");
    assert_eq!(problem.num_functions(), 28);
    assert_eq!(problem.dim(), 3);
}

/// FNV-1a over the canonical site listing, so any silent change to the
/// fixed arrangement is caught.
fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

fn canonical_listing(s: &zcssp_cli::scenario::Scenario) -> String {
    let point = |v: &zcssp::Vector| -> String {
        let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        format!("({})", coords.join(", "))
    };
    let mut lines = vec![format!("p:{}", point(&s.p))];
    for (j, site) in s.water_sites.iter().enumerate() {
        lines.push(format!("water[{j}]:{}", point(site)));
    }
    for (j, site) in s.ca_sites.iter().enumerate() {
        lines.push(format!("ca[{j}]:{}", point(site)));
    }
    lines.push(format!("x0:{}", point(&s.x0)));
    lines.join("\n")
}

#[test]
fn builtin_site_list_is_frozen() {
    let s = builtin_scenario();
    let listing = canonical_listing(&s);
    assert_eq!(listing.lines().count(), 28, "p + 26 sites + x0");
    // Spot checks of individual coordinates.
    assert_eq!(s.water_sites[0].as_slice(), &[3.5, -3.5, -3.5]);
    assert_eq!(s.water_sites[15].as_slice(), &[0.0, 3.5, 3.5]);
    assert_eq!(s.ca_sites[0].as_slice(), &[-3.5, -3.5, -3.5]);
    assert_eq!(s.ca_sites[9].as_slice(), &[0.0, 0.0, 3.5]);
    assert_eq!(s.x0.as_slice(), &[4.0, 3.853, 4.0]);
    assert!(s.water_sites.iter().all(|w| w[0] == 3.5 || w[0] == 0.0));
    assert!(s.ca_sites[..9].iter().all(|a| a[0] == -3.5));
    // And the hash of the whole listing.
    assert_eq!(fnv1a(&listing), 698_877_730_457_051_738);
}

#[test]
fn reference_run_deterministic() {
    let s = builtin_scenario();
    let problem = build_problem(&s).expect("builtin scenario is well formed");
    let mut cfg = SolverConfig::new(1.0, 1.0);
    cfg.relaxation = RelaxationSchedule::ConstExplicit(1.0);
    cfg.control = ControlMode::Cyclic;
    cfg.perturb = false;
    let result = solve(&problem, &cfg).expect("solver accepts the reference config");
    assert_eq!(result.status, RunStatus::Feasible);
    eprintln!(
        "iterations = {}, point = {:?}",
        result.iterations,
        result.final_point.as_slice()
    );
    assert_eq!(result.iterations, 4676);
}
