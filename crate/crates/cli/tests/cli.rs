use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx::assert_relative_eq;
use pshardy_cli::output::parse_csv;
use pshardy_cli::JsonTable;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pshardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pshardy")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(format!("{name}.toml")).display().to_string()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn norm_example_reaches_sqrt_three() {
    let out = pshardy(&["norm", "--config", &config("norm")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last.series, "boundary");
    assert_relative_eq!(last.value, 3f64.sqrt(), epsilon = 1e-6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("-> PASS"));
}

#[test]
fn balls_example_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("balls.csv");
    let out = pshardy(&["balls", "--config", &config("balls"), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("balls: 4 rows"));
    let rows = parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for (row, expected) in rows.iter().zip([3.0, 3.8, 3.98, 3.998]) {
        assert_relative_eq!(row.value, expected, epsilon = 1e-10);
    }
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dilation.json");
    let out = pshardy(&["dilation", "--config", &config("dilation"), "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let table: JsonTable = serde_json::from_str(&text).unwrap();
    assert_eq!(table.experiment, "dilation");
    assert_eq!(table.rows.len(), 6);
    assert!(table.passed && table.converged);
    assert_eq!(serde_json::to_string_pretty(&table).unwrap() + "\n", text);
}

#[test]
fn invalid_weights_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("norm")).unwrap().replace("[[0.5, 0.0, 1.0]]", "[[0.5, 0.0, 0.9]]");
    let path = write_config(dir.path(), &text);
    let out = pshardy(&["norm", "--config", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights must sum to 1"));
}

#[test]
fn validate_reports() {
    let ok = pshardy(&["validate", "--config", &config("weakstar")]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(ok.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("monotone")).unwrap();
    let path = write_config(dir.path(), &text.replace("[-1.0, -0.5", "[-0.5, -1.0"));
    let out = pshardy(&["validate", "--config", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schedule.r_seq is not strictly increasing"));

    let path = write_config(dir.path(), &text.replace("\"monotone\"", "\"monotne\""));
    let out = pshardy(&["validate", "--config", &path]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(1));
    assert!(err.contains("did you mean `monotone`") && err.contains("expected one of"), "{err}");
}

#[test]
fn experiment_must_match_config() {
    let out = pshardy(&["balls", "--config", &config("norm")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("declares experiment `norm`"));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(pshardy(&["norm"]).status.code(), Some(1));
    assert_eq!(pshardy(&["norm", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(pshardy(&["--help"]).status.code(), Some(0));
}

#[test]
fn help_documents_columns() {
    let out = pshardy(&["strict-inclusion", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("series norm-p") && text.contains("Exit status"), "{text}");
}

#[test]
fn tolerance_override_applies() {
    let out = pshardy(&["alpha", "--config", &config("alpha"), "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerances.periodic must be positive"));
}
