use super::config::{OutputFormat, StudySpec, TauMode, Tolerances};
use super::emit::{emit_table, order_grids};
use super::golden::{golden_compare, grid_compare, lookup_table, CompareReport, TableRef};
use super::study::{run_study, StudyTable};
use crate::error::{Result, WgError};

#[derive(Debug, Clone, Default)]
pub struct ReproduceOptions {
    pub levels: Option<Vec<usize>>,
    /// Use the reference τ and compare magnitudes (detailed tables only).
    pub reference_tau: bool,
    pub order_tol: Option<f64>,
    pub mag_tol: Option<f64>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub tables: Vec<StudyTable>,
    pub report: CompareReport,
    pub text: String,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

fn default_ladder(k: usize) -> Vec<usize> {
    if k >= 4 {
        vec![4, 8, 16]
    } else {
        vec![4, 8, 16, 32]
    }
}

/// Reruns a stored reference table. Order grids sweep `j, l ∈ 0..=4` and compare
/// finest-pair orders; detailed tables compare every order and, with
/// `reference_tau`, magnitudes (default ladder `{4, 8}` then).
pub fn reproduce_table(id: &str, opts: &ReproduceOptions) -> Result<Reproduction> {
    match lookup_table(id)? {
        TableRef::Grid(grid) => {
            if opts.reference_tau || opts.mag_tol.is_some() {
                return Err(WgError::Config("order grids have no reference τ or magnitudes".into()));
            }
            let spec = StudySpec {
                k: vec![grid.k],
                j: (0..=4).collect(),
                l: (0..=4).collect(),
                stabilizers: vec![grid.stabilizer],
                ladder: opts.levels.clone().unwrap_or_else(|| default_ladder(grid.k)),
                tau: TauMode::Auto,
                format: opts.format,
                ..StudySpec::default()
            };
            let tables = run_study(&spec)?;
            let report = grid_compare(&tables, grid, opts.order_tol.unwrap_or(0.25));
            let text = format!("{}{}\n", order_grids(&tables), report.summary());
            Ok(Reproduction { tables, report, text })
        }
        TableRef::Detailed(reference) => {
            let c = reference.combination;
            let levels = opts.levels.clone().unwrap_or_else(|| {
                if opts.reference_tau {
                    vec![4, 8]
                } else {
                    default_ladder(c.k)
                }
            });
            let tolerances = Tolerances {
                order: opts.order_tol.unwrap_or(if opts.reference_tau { 0.1 } else { 0.25 }),
                magnitude: opts.mag_tol.or(opts.reference_tau.then_some(1.10)),
            };
            let spec = StudySpec {
                k: vec![c.k],
                j: vec![c.j],
                l: vec![c.l],
                stabilizers: vec![c.stabilizer],
                ladder: levels.clone(),
                tau: if opts.reference_tau {
                    TauMode::Fixed(reference.tau)
                } else {
                    TauMode::Auto
                },
                format: opts.format,
                ..StudySpec::default()
            };
            let tables = run_study(&spec)?;
            let restricted = reference.restrict(&levels)?;
            let report = golden_compare(&tables[0].records, &restricted, &tolerances)?;
            let mut text = format!(
                "Table {} {} τ={}\n",
                reference.table,
                c,
                if opts.reference_tau { format!("{:e}", reference.tau) } else { "auto".into() }
            );
            text.push_str(&emit_table(&tables[0].records, opts.format));
            text.push_str(&report.summary());
            if report.is_soft_failure() {
                text.push_str("\nsoft failure: orders agree, magnitudes differ");
            }
            text.push('\n');
            Ok(Reproduction { tables, report, text })
        }
    }
}
