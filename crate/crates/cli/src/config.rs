//! Experiment configuration: a TOML document with nested tables.
//!
//! ```toml
//! experiment = "norm"
//! p = 2.0
//!
//! [exhaustion]
//! atoms = [[0.5, 0.0, 1.0]]   # (re, im, weight)
//! quad_weight = 0.0
//!
//! [function]
//! poly = [[1.0, 0.0], [1.0, 0.0]]   # ascending coefficients (re, im)
//! factors = []                      # (re c, im c, γ) for (1 - c z)^(-γ)
//!
//! [schedule]
//! r_seq = [-0.01, -0.005, -0.002, -0.001]
//!
//! [tolerances]
//! periodic = 1e-8
//! area = 1e-6
//! grid_n = 512
//!
//! [output]
//! format = "csv"
//! path = "norm.csv"
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pshardy_core::{AnalyticFunction, Exhaustion, ExhaustionRecord, FunctionRecord, HardyExponent, TestField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Absolute slack on `Σ weights = 1`.
const WEIGHT_SUM_SLACK: f64 = 1e-12;
/// Largest truncation order of the divergent atomic series.
const MAX_TRUNCATION: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    Norm,
    Alpha,
    MuPair,
    Monotone,
    Weakstar,
    Dilation,
    Balls,
    Density,
    StrictInclusion,
    Compare,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Norm,
        ExperimentKind::Alpha,
        ExperimentKind::MuPair,
        ExperimentKind::Monotone,
        ExperimentKind::Weakstar,
        ExperimentKind::Dilation,
        ExperimentKind::Balls,
        ExperimentKind::Density,
        ExperimentKind::StrictInclusion,
        ExperimentKind::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Norm => "norm",
            ExperimentKind::Alpha => "alpha",
            ExperimentKind::MuPair => "mu-pair",
            ExperimentKind::Monotone => "monotone",
            ExperimentKind::Weakstar => "weakstar",
            ExperimentKind::Dilation => "dilation",
            ExperimentKind::Balls => "balls",
            ExperimentKind::Density => "density",
            ExperimentKind::StrictInclusion => "strict-inclusion",
            ExperimentKind::Compare => "compare",
        }
    }

    /// Series emitted by the experiment, as shown in `--help`.
    pub fn columns(self) -> &'static str {
        match self {
            ExperimentKind::Norm => {
                "series levels (parameter r, value μ_{u,r}(|f|^p)), then levels-limit, riesz and boundary \
                 (parameter p, value ‖f‖_{H^p_u}, reference = boundary route). Needs exhaustion, function, p; \
                 r_seq enables the levels route."
            }
            ExperimentKind::Alpha => {
                "series alpha (parameter θ, value α_u(θ)) on `samples` equispaced angles, then mass \
                 (value ∫α_u dλ, reference 1). Needs exhaustion."
            }
            ExperimentKind::MuPair => {
                "series lelong-jensen and contour (parameter r, value μ_{u,r}(φ); contour reference = \
                 lelong-jensen). Needs exhaustion, phi, r_seq."
            }
            ExperimentKind::Monotone => "series mu (parameter r, value μ_{u,r}(φ)). Needs exhaustion, phi, r_seq.",
            ExperimentKind::Weakstar => {
                "series pairing (parameter r, value ∫φ Re f dμ_{u,r}, reference its boundary limit) and unit \
                 (same with φ ≡ 1). Needs exhaustion, function, phi, p > 1, r_seq."
            }
            ExperimentKind::Dilation => {
                "series norm (parameter t, value ‖f_t‖, reference ‖f‖) and difference (value ‖f_t - f‖, \
                 reference 0). Needs exhaustion, function, p, t_seq."
            }
            ExperimentKind::Balls => {
                "series norm-p (parameter t, value ‖f‖^p for u = G(·, t), reference |f*(1)|^p). \
                 Needs function, p, t_seq."
            }
            ExperimentKind::Density => {
                "series total, section and dilation (parameter t, values ‖S_n f_t - f‖, ‖S_n f_t - f_t‖, \
                 ‖f_t - f‖). Needs exhaustion, function, p, t_seq and n_seq of equal length."
            }
            ExperimentKind::StrictInclusion => {
                "series norm-p (parameter K, value ‖f‖^p for the K-term atomic series), ratio (successive \
                 ratios) and classical (norm^p for u = log|z|). Needs function, p, k_seq."
            }
            ExperimentKind::Compare => {
                "series u and v (value ‖f‖ under each exhaustion). Needs exhaustion, compare_with, \
                 function, p."
            }
        }
    }

    fn needs_function(self) -> bool {
        !matches!(self, ExperimentKind::Alpha | ExperimentKind::MuPair | ExperimentKind::Monotone)
    }

    fn needs_exhaustion(self) -> bool {
        !matches!(self, ExperimentKind::Balls | ExperimentKind::StrictInclusion)
    }

    fn needs_phi(self) -> bool {
        matches!(self, ExperimentKind::MuPair | ExperimentKind::Monotone | ExperimentKind::Weakstar)
    }

    fn needs_p(self) -> bool {
        self.needs_function()
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(kind) = ExperimentKind::ALL.into_iter().find(|k| k.name() == s) {
            return Ok(kind);
        }
        let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        let closest = names
            .iter()
            .map(|n| (strsim::levenshtein(s, n), *n))
            .min()
            .filter(|(d, _)| *d <= 3)
            .map(|(_, n)| format!(" (did you mean `{n}`?)"))
            .unwrap_or_default();
        Err(format!("unknown experiment `{s}`{closest}; expected one of: {}", names.join(", ")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format `{other}`; expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Boundary (periodic) integrals.
    pub periodic: f64,
    /// Area integrals over level regions.
    pub area: f64,
    /// Marching-squares grid for the contour route.
    pub grid_n: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { periodic: 1e-8, area: 1e-6, grid_n: 512 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub r_seq: Option<Vec<f64>>,
    pub t_seq: Option<Vec<f64>>,
    pub k_seq: Option<Vec<usize>>,
    pub n_seq: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    Constant,
    RealPart,
    ModulusPower,
}

/// Test function `φ` for the pairing experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub kind: PhiKind,
    /// `constant` only.
    #[serde(default)]
    pub value: Option<f64>,
    /// Function `g` in `Re g` or `|g|^q`; defaults to the experiment's function.
    #[serde(default)]
    pub function: Option<FunctionRecord>,
    /// Exponent `q` of `|g|^q`.
    #[serde(default)]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

/// Raw configuration as parsed from TOML; checked by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub exhaustion: Option<ExhaustionRecord>,
    /// Second exhaustion `v` for `compare`.
    #[serde(default)]
    pub compare_with: Option<ExhaustionRecord>,
    #[serde(default)]
    pub function: Option<FunctionRecord>,
    #[serde(default)]
    pub phi: Option<PhiConfig>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Angles sampled by `alpha`.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A configuration that passed validation, with every record turned into its typed value.
#[derive(Debug, Clone)]
pub struct Plan {
    pub kind: ExperimentKind,
    pub p: Option<HardyExponent>,
    pub exhaustion: Option<Exhaustion>,
    pub compare_with: Option<Exhaustion>,
    pub function: Option<AnalyticFunction>,
    pub phi: Option<(TestField, PhiConfig)>,
    pub schedule: Schedule,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::InvalidConfig(vec![format!("config does not parse: {}", e.message())]))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Structural checks only; an empty list means the config is valid.
    pub fn validate(&self) -> Vec<String> {
        match self.plan() {
            Ok(_) => Vec::new(),
            Err(CliError::InvalidConfig(v)) => v,
            Err(other) => vec![other.to_string()],
        }
    }

    /// Validates and resolves the configuration.
    pub fn plan(&self) -> Result<Plan, CliError> {
        let mut issues = Vec::new();
        let kind = match self.experiment.parse::<ExperimentKind>() {
            Ok(k) => Some(k),
            Err(e) => {
                issues.push(e);
                None
            }
        };
        let tol = &self.tolerances;
        for (name, v) in [("tolerances.periodic", tol.periodic), ("tolerances.area", tol.area)] {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(format!("{name} must be positive, got {v}"));
            }
        }
        if tol.grid_n < 16 {
            issues.push(format!("tolerances.grid_n must be at least 16, got {}", tol.grid_n));
        }
        let exhaustion = self.exhaustion.as_ref().and_then(|rec| exhaustion_from(rec, "exhaustion", &mut issues));
        let compare_with = self.compare_with.as_ref().and_then(|rec| exhaustion_from(rec, "compare_with", &mut issues));
        let function = self.function.as_ref().and_then(|rec| function_from(rec, "function", &mut issues));
        let p = self.p.and_then(|p| match HardyExponent::new(p) {
            Ok(e) => Some(e),
            Err(_) => {
                issues.push(format!("p must be positive, got {p}"));
                None
            }
        });
        let s = &self.schedule;
        if let Some(r) = &s.r_seq {
            check_strictly_increasing("schedule.r_seq", r, &mut issues);
            if r.iter().any(|&x| x.is_nan() || x >= 0.0) {
                issues.push("schedule.r_seq: levels must be negative".into());
            }
        }
        if let Some(t) = &s.t_seq {
            check_strictly_increasing("schedule.t_seq", t, &mut issues);
            if t.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                issues.push("schedule.t_seq: parameters must lie in (0, 1)".into());
            }
        }
        if let Some(k) = &s.k_seq {
            check_strictly_increasing("schedule.k_seq", &k.iter().map(|&x| x as f64).collect::<Vec<_>>(), &mut issues);
            if k.iter().any(|&x| !(2..=MAX_TRUNCATION).contains(&x)) {
                issues.push(format!("schedule.k_seq: orders must lie in 2..={MAX_TRUNCATION}"));
            }
        }
        if let Some(n) = &s.n_seq {
            check_strictly_increasing("schedule.n_seq", &n.iter().map(|&x| x as f64).collect::<Vec<_>>(), &mut issues);
        }

        let phi = self.phi.as_ref().and_then(|cfg| phi_from(cfg, function.as_ref(), &mut issues));
        if let Some(kind) = kind {
            let mut require = |present: bool, what: &str| {
                if !present {
                    issues.push(format!("experiment `{kind}` requires {what}"));
                }
            };
            if kind.needs_exhaustion() {
                require(self.exhaustion.is_some(), "[exhaustion]");
            }
            if kind.needs_function() {
                require(self.function.is_some(), "[function]");
            }
            if kind.needs_p() {
                require(self.p.is_some(), "p");
            }
            if kind.needs_phi() {
                require(self.phi.is_some(), "[phi]");
            }
            match kind {
                ExperimentKind::MuPair | ExperimentKind::Monotone | ExperimentKind::Weakstar => {
                    require(s.r_seq.as_ref().is_some_and(|r| !r.is_empty()), "schedule.r_seq");
                }
                ExperimentKind::Dilation | ExperimentKind::Balls => {
                    require(s.t_seq.as_ref().is_some_and(|t| !t.is_empty()), "schedule.t_seq");
                }
                ExperimentKind::Density => {
                    require(s.t_seq.as_ref().is_some_and(|t| !t.is_empty()), "schedule.t_seq");
                    require(s.n_seq.is_some(), "schedule.n_seq");
                    if let (Some(t), Some(n)) = (&s.t_seq, &s.n_seq) {
                        if t.len() != n.len() {
                            issues.push(format!("schedule.t_seq and schedule.n_seq differ in length ({} vs {})", t.len(), n.len()));
                        }
                    }
                }
                ExperimentKind::StrictInclusion => {
                    require(s.k_seq.as_ref().is_some_and(|k| !k.is_empty()), "schedule.k_seq");
                }
                ExperimentKind::Compare => require(self.compare_with.is_some(), "[compare_with]"),
                ExperimentKind::Norm | ExperimentKind::Alpha => {}
            }
            if kind == ExperimentKind::Weakstar && self.p.is_some_and(|p| p <= 1.0) {
                issues.push("experiment `weakstar` requires p > 1".into());
            }
        }
        if self.samples == Some(0) {
            issues.push("samples must be positive".into());
        }
        if !issues.is_empty() {
            return Err(CliError::InvalidConfig(issues));
        }
        Ok(Plan {
            kind: kind.expect("validated"),
            p,
            exhaustion,
            compare_with,
            function,
            phi,
            schedule: self.schedule.clone(),
            tolerances: self.tolerances,
            samples: self.samples.unwrap_or(64),
            output: self.output.clone(),
        })
    }
}

fn check_strictly_increasing(name: &str, seq: &[f64], issues: &mut Vec<String>) {
    if let Some(i) = seq.windows(2).position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        issues.push(format!("{name} is not strictly increasing at index {}: {} then {}", i + 1, seq[i], seq[i + 1]));
    }
}

fn exhaustion_from(rec: &ExhaustionRecord, name: &str, issues: &mut Vec<String>) -> Option<Exhaustion> {
    let sum: f64 = rec.atoms.iter().map(|a| a[2]).sum::<f64>() + rec.quad_weight;
    if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
        issues.push(format!("{name}: weights must sum to 1, got {sum}"));
        return None;
    }
    Exhaustion::try_from(rec).map_err(|e| issues.push(format!("{name}: {e}"))).ok()
}

fn function_from(rec: &FunctionRecord, name: &str, issues: &mut Vec<String>) -> Option<AnalyticFunction> {
    AnalyticFunction::try_from(rec).map_err(|e| issues.push(format!("{name}: {e}"))).ok()
}

fn phi_from(cfg: &PhiConfig, default: Option<&AnalyticFunction>, issues: &mut Vec<String>) -> Option<(TestField, PhiConfig)> {
    let g = match &cfg.function {
        Some(rec) => function_from(rec, "phi.function", issues),
        None => default.cloned(),
    };
    let field = match cfg.kind {
        PhiKind::Constant => match cfg.value {
            Some(c) if c.is_finite() => Some(TestField::constant(c)),
            _ => {
                issues.push("phi: kind `constant` requires a finite `value`".into());
                None
            }
        },
        PhiKind::RealPart => match g {
            Some(g) => Some(TestField::real_part(&g)),
            None => {
                issues.push("phi: kind `real-part` requires phi.function or [function]".into());
                None
            }
        },
        PhiKind::ModulusPower => match (g, cfg.q.map(HardyExponent::new)) {
            (Some(g), Some(Ok(q))) => Some(TestField::modulus_power(&g, q)),
            (None, _) => {
                issues.push("phi: kind `modulus-power` requires phi.function or [function]".into());
                None
            }
            _ => {
                issues.push("phi: kind `modulus-power` requires a positive `q`".into());
                None
            }
        },
    };
    field.map(|f| (f, cfg.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NORM: &str = r#"
experiment = "norm"
p = 2.0
[exhaustion]
atoms = [[0.5, 0.0, 1.0]]
[function]
poly = [[1.0, 0.0], [1.0, 0.0]]
"#;

    #[test]
    fn valid_config_has_empty_report() {
        let cfg = ExperimentConfig::from_toml(NORM).unwrap();
        assert!(cfg.validate().is_empty());
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.kind, ExperimentKind::Norm);
        assert_eq!(plan.tolerances, Tolerances::default());
        assert_eq!(plan.output.format, OutputFormat::Csv);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let cfg = ExperimentConfig::from_toml(&NORM.replace("0.5, 0.0, 1.0", "0.5, 0.0, 0.9")).unwrap();
        let report = cfg.validate();
        assert_eq!(report.len(), 1);
        assert!(report[0].contains("weights must sum to 1"), "{report:?}");
    }

    #[test]
    fn unknown_experiment_gets_suggestions() {
        let cfg = ExperimentConfig::from_toml(&NORM.replace("\"norm\"", "\"nrom\"")).unwrap();
        let report = cfg.validate();
        assert!(report[0].contains("did you mean `norm`"), "{report:?}");
        assert!(report[0].contains("strict-inclusion"));
        let far = "zzzzzzzzzz".parse::<ExperimentKind>().unwrap_err();
        assert!(!far.contains("did you mean"));
    }

    #[test]
    fn non_monotone_schedule_is_named() {
        let text = format!("{NORM}[schedule]\nr_seq = [-0.1, -0.2, -0.05]\n");
        let report = ExperimentConfig::from_toml(&text).unwrap().validate();
        assert_eq!(report, vec!["schedule.r_seq is not strictly increasing at index 1: -0.1 then -0.2".to_string()]);
    }

    #[test]
    fn tolerances_must_be_positive() {
        let text = format!("{NORM}[tolerances]\nperiodic = 0.0\narea = -1e-6\n");
        let report = ExperimentConfig::from_toml(&text).unwrap().validate();
        assert_eq!(report.len(), 2);
    }

    #[test]
    fn missing_inputs_are_reported() {
        let cfg = ExperimentConfig::from_toml("experiment = \"weakstar\"\np = 1.0\n").unwrap();
        let report = cfg.validate();
        for needle in ["[exhaustion]", "[function]", "[phi]", "schedule.r_seq", "p > 1"] {
            assert!(report.iter().any(|m| m.contains(needle)), "{needle}: {report:?}");
        }
    }

    #[test]
    fn phi_variants() {
        let base = "experiment = \"monotone\"\n[exhaustion]\nquad_weight = 1.0\n[schedule]\nr_seq = [-0.3, -0.1]\n";
        let ok = format!("{base}[phi]\nkind = \"modulus-power\"\nq = 2.0\nfunction = {{ poly = [[1.0, 0.0], [1.0, 0.0]] }}\n");
        assert!(ExperimentConfig::from_toml(&ok).unwrap().validate().is_empty());
        let missing = format!("{base}[phi]\nkind = \"modulus-power\"\nq = 2.0\n");
        assert_eq!(ExperimentConfig::from_toml(&missing).unwrap().validate().len(), 1);
        let constant = format!("{base}[phi]\nkind = \"constant\"\nvalue = 1.0\n");
        assert!(ExperimentConfig::from_toml(&constant).unwrap().validate().is_empty());
    }

    #[test]
    fn unknown_keys_do_not_parse() {
        assert!(matches!(ExperimentConfig::from_toml(&format!("bogus = 1\n{NORM}")), Err(CliError::InvalidConfig(_))));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::from_toml(NORM).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
