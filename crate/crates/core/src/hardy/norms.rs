use std::f64::consts::FRAC_1_PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticFunction, HardyExponent};
use crate::error::{Error, Result};
use crate::exhaustion::Exhaustion;
use crate::measures::{check_increasing_levels, mu_pair_lj, TestField};
use crate::quadrature::{disk_integrate, Convergence, QuadratureReport, Region};
use crate::table::ConvergenceTable;

/// Successive norm ratios above this along a schedule count as geometric growth.
const GROWTH_RATIO: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormRoute {
    /// Limit of `μ_{u,r}(|f|^p)` along a level schedule.
    Levels,
    /// `Σ c_j |f(a_j)|^p + c_q/π ∫|f|^p - ∫ u Δ|f|^p`.
    Riesz,
    /// `∫ |f*|^p α_u dλ`.
    Boundary,
}

/// How the levels route turns its table into a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelsLimit {
    /// The last row, a lower bound by monotonicity.
    LastRow,
    /// Linear extrapolation of the last two rows to `r = 0`.
    #[default]
    Linear,
}

#[derive(Debug, Clone)]
pub struct NormResult {
    pub p: HardyExponent,
    pub route: NormRoute,
    /// `‖f‖_{H^p_u}`; `+∞` when the defining integral diverges.
    pub value: f64,
    pub finite: bool,
    /// Quadrature report for the `p`-th power of the norm.
    pub report: QuadratureReport,
    /// Levels route only: the last row of the table, as a norm.
    pub last_row: Option<f64>,
    pub table: Option<ConvergenceTable>,
}

impl NormResult {
    pub fn pth_power(&self) -> f64 {
        self.report.value
    }

    fn from_power(p: HardyExponent, route: NormRoute, report: QuadratureReport) -> Self {
        let finite = report.status != Convergence::Divergent && report.value.is_finite();
        let value = if finite { report.value.max(0.0).powf(1.0 / p.value()) } else { f64::INFINITY };
        NormResult { p, route, value, finite, report, last_row: None, table: None }
    }
}

/// `‖·‖_{L^p_u}` of a boundary function given as `θ ↦ |g(e^{iθ})|^p`.
pub fn norm_boundary_trace<G: Fn(f64) -> f64>(
    trace_pow: G,
    singular_angles: &[f64],
    u: &Exhaustion,
    p: HardyExponent,
    tol: f64,
) -> NormResult {
    let report = u.boundary_pair(trace_pow, singular_angles, tol);
    NormResult::from_power(p, NormRoute::Boundary, report)
}

/// `(∫ |f*|^p α_u dλ)^{1/p}`.
pub fn norm_boundary(f: &AnalyticFunction, p: HardyExponent, u: &Exhaustion, tol: f64) -> NormResult {
    norm_boundary_trace(|t| f.boundary_modulus_pow(t, p.value()), &f.singular_angles(), u, p, tol)
}

/// Riesz decomposition route; needs `f` analytic across the circle.
pub fn norm_riesz(f: &AnalyticFunction, p: HardyExponent, u: &Exhaustion, tol: f64) -> Result<NormResult> {
    if !f.is_boundary_regular() {
        return Err(Error::Precondition(
            "the Riesz route needs f analytic on the closed disk; use the boundary route for boundary singularities".into(),
        ));
    }
    let pv = p.value();
    let atoms: f64 = u.atoms().iter().map(|a| a.weight * f.eval_raw(a.pole.value()).norm().powf(pv)).sum();
    let mut report = QuadratureReport::exact(atoms);
    let mut points = u.poles();
    if pv < 2.0 {
        for z in f.disk_zeros() {
            if !points.iter().any(|q| (q - z).norm() < 1e-14) {
                points.push(z);
            }
        }
    }
    let disk = Region::disk();
    let parts = if u.quad_weight() > 0.0 { 2.0 } else { 1.0 };
    if u.quad_weight() > 0.0 {
        let area = disk_integrate(|z| FRAC_1_PI * f.eval_raw(z).norm().powf(pv), &disk, &points, tol / parts);
        report = report.combine(area.scaled(u.quad_weight()));
    }
    let potential = disk_integrate(
        |z| {
            let d = f.lap_density_fp_raw(pv, z).unwrap_or(f64::NAN);
            if d == 0.0 {
                0.0
            } else {
                -u.eval_raw(z) * d
            }
        },
        &disk,
        &points,
        tol / parts,
    );
    report = report.combine(potential);
    if !report.value.is_finite() {
        return Err(Error::Domain("Riesz decomposition integral is not finite".into()));
    }
    Ok(NormResult::from_power(p, NormRoute::Riesz, report))
}

/// Levels route: rows `μ_{u,r}(|f|^p)` along an increasing schedule of negative levels.
pub fn norm_levels(
    f: &AnalyticFunction,
    p: HardyExponent,
    u: &Exhaustion,
    r_seq: &[f64],
    tol: f64,
    limit: LevelsLimit,
) -> Result<NormResult> {
    check_increasing_levels(r_seq)?;
    let phi = TestField::modulus_power(f, p);
    let mut table = ConvergenceTable::new("levels");
    let mut last = QuadratureReport::exact(0.0);
    for &r in r_seq {
        let pairing = mu_pair_lj(u, r, &phi, tol)?;
        table.push("levels", r, pairing.value, f64::NAN, pairing.report.est_error, pairing.report.converged());
        last = pairing.report;
    }
    let monotone = table.is_nondecreasing("levels");
    table.set_flag("monotone", monotone);
    let values = table.values("levels");
    let n = values.len();
    let power = match limit {
        LevelsLimit::Linear if n >= 2 => {
            let (r0, r1) = (r_seq[n - 2], r_seq[n - 1]);
            let slope = (values[n - 1] - values[n - 2]) / (r1 - r0);
            values[n - 1] + slope * (0.0 - r1)
        }
        _ => values[n - 1],
    };
    let power = power.max(values[n - 1]);
    table.set_metric("limit", power);
    let report = QuadratureReport { value: power, ..last };
    let mut result = NormResult::from_power(p, NormRoute::Levels, report);
    result.last_row = Some(values[n - 1].max(0.0).powf(1.0 / p.value()));
    result.table = Some(table);
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NotMember,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct Membership {
    pub verdict: Verdict,
    pub norm: NormResult,
}

/// Whether `f ∈ H^p_u`, decided by refinement of the boundary route.
///
/// A boundary singularity with `Σγ p ≥ 1` already rules out `f* ∈ L^p(λ)`, and since `α_u` is
/// bounded below that rules out `f* ∈ L^p(α_u dλ)` as well.
pub fn membership(f: &AnalyticFunction, p: HardyExponent, u: &Exhaustion, tol: f64) -> Membership {
    let norm = norm_boundary(f, p, u, tol);
    let verdict = if !f.classical_hp(p.value()) {
        Verdict::NotMember
    } else {
        match norm.report.status {
            Convergence::Converged => Verdict::Member,
            Convergence::Divergent => Verdict::NotMember,
            Convergence::Budget => Verdict::Inconclusive,
        }
    };
    Membership { verdict, norm }
}

/// Membership along a schedule of exhaustions `u_1, u_2, …` approximating a limit exhaustion.
///
/// Sustained geometric growth of the norms (the last three successive ratios all above
/// `1.1`) gives `NotMember`; a last relative increment below `tol` gives `Member`.
pub fn schedule_membership(f: &AnalyticFunction, p: HardyExponent, schedule: &[Exhaustion], tol: f64) -> Result<Membership> {
    if schedule.is_empty() {
        return Err(Error::Precondition("exhaustion schedule is empty".into()));
    }
    let norms: Vec<NormResult> = schedule.iter().map(|u| norm_boundary(f, p, u, tol)).collect();
    let powers: Vec<f64> = norms.iter().map(NormResult::pth_power).collect();
    let last = norms.last().cloned().expect("nonempty schedule");
    if norms.iter().any(|n| !n.finite) {
        return Ok(Membership { verdict: Verdict::NotMember, norm: last });
    }
    let ratios: Vec<f64> = powers.windows(2).map(|w| w[1] / w[0]).collect();
    let verdict = if ratios.len() >= 3 && ratios[ratios.len() - 3..].iter().all(|&q| q >= GROWTH_RATIO) {
        Verdict::NotMember
    } else if ratios.last().is_some_and(|&q| (q - 1.0).abs() <= tol) {
        Verdict::Member
    } else {
        Verdict::Inconclusive
    };
    Ok(Membership { verdict, norm: last })
}
