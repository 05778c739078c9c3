//! Convergence studies, table emission, reference comparisons and the
//! property suite behind the command-line interface.

pub mod config;
pub mod emit;
pub mod golden;
pub mod reproduce;
pub mod study;
pub mod surface;
pub mod verify;

pub use config::{Combination, OutputFormat, StudySpec, SurfaceSource, TauMode, Tolerances};
pub use emit::{emit_study, emit_table, format_sci};
pub use golden::{golden_compare, grid_compare, lookup_table, CompareReport, ReferenceTable, TableRef};
pub use reproduce::{reproduce_table, ReproduceOptions, Reproduction};
pub use study::{run_combination, run_study, solve_level, worker_pool, StudyTable};
pub use surface::{export_function_surface, export_surface, export_solution_surface, parse_surface};
pub use verify::{error_equation_residual, property_suite, CheckOutcome};
