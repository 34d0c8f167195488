//! Convergence tables emitted by the experiments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One row: a parameter value, the computed quantity, and the reference it should approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Which column of the experiment this row belongs to (e.g. `norm`, `difference`).
    pub series: String,
    pub parameter: f64,
    pub value: f64,
    /// Reference limit; `NaN` when the experiment has none for this series.
    pub reference: f64,
    pub abs_error: f64,
    /// Quadrature error estimate attached to `value`.
    pub est_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub experiment: String,
    pub rows: Vec<TableRow>,
    /// Named pass/fail checks evaluated on the rows (e.g. monotonicity).
    pub flags: BTreeMap<String, bool>,
    /// Named scalar outcomes (e.g. the parameter of the first ball exit).
    pub metrics: BTreeMap<String, f64>,
}

impl ConvergenceTable {
    pub fn new(experiment: impl Into<String>) -> Self {
        ConvergenceTable { experiment: experiment.into(), ..Default::default() }
    }

    pub fn push(&mut self, series: &str, parameter: f64, value: f64, reference: f64, est_error: f64, converged: bool) {
        let abs_error = if reference.is_nan() { f64::NAN } else { (value - reference).abs() };
        self.rows.push(TableRow { series: series.to_string(), parameter, value, reference, abs_error, est_error, converged });
    }

    pub fn series<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a TableRow> + 'a {
        self.rows.iter().filter(move |r| r.series == name)
    }

    pub fn values(&self, name: &str) -> Vec<f64> {
        self.series(name).map(|r| r.value).collect()
    }

    /// Rows of `name` never drop by more than their combined error estimates.
    pub fn is_nondecreasing(&self, name: &str) -> bool {
        let rows: Vec<&TableRow> = self.series(name).collect();
        rows.windows(2).all(|w| w[1].value >= w[0].value - (w[0].est_error + w[1].est_error))
    }

    pub fn is_nonincreasing(&self, name: &str) -> bool {
        let rows: Vec<&TableRow> = self.series(name).collect();
        rows.windows(2).all(|w| w[1].value <= w[0].value + (w[0].est_error + w[1].est_error))
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn set_flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.to_string(), value);
    }

    pub fn set_metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.flags.values().all(|&f| f)
    }
}
