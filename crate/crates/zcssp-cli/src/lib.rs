//! Experiment harness for the `zcssp` feasibility solver.
//!
//! The library half of the `zcssp` binary: scenario construction for the
//! molecular Voronoi-cell experiments, a small config format for batch
//! table runs, parallel experiment execution with summary statistics, and
//! runtime self-check suites for the solver invariants.

mod cli;
pub mod config;
pub mod experiment;
pub mod scenario;
pub mod verify;

pub use cli::cli_main;
