use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use pshardy_core::{ConvergenceTable, TableRow};
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::CliError;

/// CSV header, identical for every experiment.
pub const CSV_HEADER: [&str; 7] = ["series", "parameter", "value", "reference", "abs_error", "est_error", "converged"];

/// JSON row; non-finite numbers are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonRow {
    pub series: String,
    pub parameter: Option<f64>,
    pub value: Option<f64>,
    pub reference: Option<f64>,
    pub abs_error: Option<f64>,
    pub est_error: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonTable {
    pub experiment: String,
    pub rows: Vec<JsonRow>,
    pub flags: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, Option<f64>>,
    pub converged: bool,
    pub passed: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl From<&TableRow> for JsonRow {
    fn from(r: &TableRow) -> Self {
        JsonRow {
            series: r.series.clone(),
            parameter: finite(r.parameter),
            value: finite(r.value),
            reference: finite(r.reference),
            abs_error: finite(r.abs_error),
            est_error: finite(r.est_error),
            converged: r.converged,
        }
    }
}

impl From<&ConvergenceTable> for JsonTable {
    fn from(t: &ConvergenceTable) -> Self {
        JsonTable {
            experiment: t.experiment.clone(),
            rows: t.rows.iter().map(JsonRow::from).collect(),
            flags: t.flags.clone(),
            metrics: t.metrics.iter().map(|(k, v)| (k.clone(), finite(*v))).collect(),
            converged: t.all_converged(),
            passed: t.passed(),
        }
    }
}

pub fn render(table: &ConvergenceTable, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Csv => render_csv(table),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&JsonTable::from(table)).map_err(|e| CliError::Serialize(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn render_csv(table: &ConvergenceTable) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in &table.rows {
        w.serialize((&r.series, r.parameter, r.value, r.reference, r.abs_error, r.est_error, r.converged)).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Parses CSV produced by [`render`] back into rows.
pub fn parse_csv(text: &str) -> Result<Vec<TableRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| CliError::Serialize(e.to_string()))?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(CliError::Serialize(format!("unexpected header {header:?}")));
    }
    rdr.deserialize::<TableRow>().map(|r| r.map_err(|e| CliError::Serialize(e.to_string()))).collect()
}

/// Writes through a temporary file in the target directory, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source: std::io::Error| CliError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// One-line verdict: row count, convergence and each named flag.
pub fn summary(table: &ConvergenceTable) -> String {
    let flags: Vec<String> = table.flags.iter().map(|(k, v)| format!("{k}={}", if *v { "pass" } else { "FAIL" })).collect();
    let status = match (table.all_converged(), table.passed()) {
        (true, true) => "PASS",
        (false, _) => "NOT CONVERGED",
        (true, false) => "FAIL",
    };
    let mut line = format!("{}: {} rows, converged={}", table.experiment, table.rows.len(), table.all_converged());
    if !flags.is_empty() {
        line.push_str(&format!(", {}", flags.join(", ")));
    }
    line.push_str(&format!(" -> {status}"));
    line
}
