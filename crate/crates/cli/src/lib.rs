//! Configuration-driven runner for the pshardy experiments.
//!
//! A run reads one TOML configuration, validates it, executes the experiment and emits a
//! convergence table as CSV or JSON.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat, Plan, Tolerances};
pub use error::CliError;
pub use output::{render, summary, JsonRow, JsonTable};
pub use run::run;

use pshardy_core::ConvergenceTable;

/// Command-line overrides applied on top of the configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// Replaces both the periodic and the area tolerance.
    pub tol: Option<f64>,
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: ConvergenceTable,
    pub rendered: String,
    pub written_to: Option<PathBuf>,
}

impl Outcome {
    /// 0 when every row converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.table.all_converged() {
            0
        } else {
            2
        }
    }
}

/// Validates `config` for `kind`, runs it and writes the table if an output path is set.
pub fn execute(kind: ExperimentKind, mut config: ExperimentConfig, overrides: &Overrides) -> Result<Outcome, CliError> {
    if config.experiment != kind.name() {
        return Err(CliError::InvalidConfig(vec![format!(
            "config declares experiment `{}` but `{kind}` was requested",
            config.experiment
        )]));
    }
    if let Some(tol) = overrides.tol {
        config.tolerances.periodic = tol;
        config.tolerances.area = tol;
    }
    if let Some(f) = overrides.format {
        config.output.format = f;
    }
    if let Some(out) = &overrides.out {
        config.output.path = Some(out.clone());
    }
    let plan = config.plan()?;
    let table = run(&plan)?;
    let rendered = render(&table, plan.output.format)?;
    if let Some(path) = &plan.output.path {
        output::write_atomic(path, &rendered)?;
    }
    Ok(Outcome { table, rendered, written_to: plan.output.path })
}
