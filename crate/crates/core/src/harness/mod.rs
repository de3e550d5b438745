//! Experiment runner: JSON configs in, CSV traces, JSON reports and SVG plots out.

pub mod check;
pub mod config;
pub mod criteria;
pub mod plot;
pub mod run;
pub mod suite;
pub mod tracefile;

pub use check::{run_check, CheckReport};
pub use config::{ExperimentConfig, ProblemSpec, SolverSpec, X0Spec, SEED_ENV};
pub use plot::emit_plot;
pub use run::{exit_code_for, run_experiment, RunOutput, EXIT_CLAIM, EXIT_INVALID, EXIT_OK, EXIT_SOLVER};
pub use suite::{render_table, suite, SuiteOptions, SuiteSummary};
pub use tracefile::{read_trace_file, write_trace_file};
