use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::norms::{membership, norm_boundary, norm_boundary_trace, NormResult, Verdict};
use crate::analytic::{AnalyticFunction, BoundaryTrace, HardyExponent};
use crate::error::{Error, Result};
use crate::exhaustion::Exhaustion;
use crate::measures::{check_increasing_levels, mu_pair_contour, TestField};
use crate::quadrature::ScalarField;
use crate::table::ConvergenceTable;

const RATIO_BAND: f64 = 0.05;
const LEVEL_NUDGE: f64 = 1e-9;
const MAX_NUDGES: usize = 16;
const COMPARISON_GRID: usize = 100;
const TAIL_TERMS: usize = 4096;

fn check_dilations(t_seq: &[f64]) -> Result<()> {
    if t_seq.is_empty() {
        return Err(Error::Precondition("dilation schedule is empty".into()));
    }
    if t_seq.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::Precondition("dilation parameters must lie in (0, 1)".into()));
    }
    if t_seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("dilation schedule must be strictly increasing".into()));
    }
    Ok(())
}

fn require_member(f: &AnalyticFunction, p: HardyExponent, u: &Exhaustion, tol: f64) -> Result<NormResult> {
    let m = membership(f, p, u, tol);
    match m.verdict {
        Verdict::Member => Ok(m.norm),
        other => Err(Error::Precondition(format!("f is not certified to lie in H^p_u (verdict {other:?})"))),
    }
}

fn trace_or_infinite(f: &AnalyticFunction, theta: f64) -> Option<Complex64> {
    match f.boundary_trace(theta) {
        BoundaryTrace::Finite(v) => Some(v),
        BoundaryTrace::Infinite => None,
    }
}

/// Norms of a boundary-singular `f` under the truncations `K` of the divergent atomic series.
///
/// Series `norm-p` holds `‖f‖^p_{H^p_{u_K}}`, series `ratio` the successive ratios, with
/// reference `2^{2s-1}` where `s = γp` is the order of the singularity at angle `0`. The row
/// `classical` is the norm for `u = log|z|`.
pub fn strict_inclusion_study(f: &AnalyticFunction, p: HardyExponent, k_seq: &[usize], tol: f64) -> Result<ConvergenceTable> {
    if k_seq.is_empty() || k_seq.windows(2).any(|w| w[0] >= w[1]) || k_seq[0] < 2 {
        return Err(Error::Precondition("truncation orders must be strictly increasing and at least 2".into()));
    }
    let order = f
        .excess_orders()
        .into_iter()
        .find(|(theta, _)| theta.abs() < 1e-14 || (theta - TAU).abs() < 1e-14)
        .map(|(_, o)| o * p.value());
    let reference = order.map_or(f64::NAN, |s| 2f64.powf(2.0 * s - 1.0));
    let mut cache: BTreeMap<usize, NormResult> = BTreeMap::new();
    let mut norm = |k: usize| -> Result<NormResult> {
        if let Some(n) = cache.get(&k) {
            return Ok(n.clone());
        }
        let n = norm_boundary(f, p, &Exhaustion::truncated_series(k)?, tol);
        cache.insert(k, n.clone());
        Ok(n)
    };
    let mut table = ConvergenceTable::new("strict-inclusion");
    let mut in_band = true;
    for &k in k_seq {
        let prev = norm(k - 1)?;
        let cur = norm(k)?;
        let (a, b) = (prev.pth_power(), cur.pth_power());
        table.push("norm-p", k as f64, b, f64::NAN, cur.report.est_error, cur.report.converged());
        let ratio = b / a;
        let ratio_err = (cur.report.est_error + ratio * prev.report.est_error) / a;
        table.push("ratio", k as f64, ratio, reference, ratio_err, cur.report.converged() && prev.report.converged());
        in_band &= (ratio - reference).abs() <= RATIO_BAND;
    }
    let classical = norm_boundary(f, p, &Exhaustion::log_modulus(), tol);
    table.push("classical", 0.0, classical.pth_power(), f64::NAN, classical.report.est_error, classical.report.converged());
    table.set_flag("ratios_in_band", in_band);
    table.set_flag("classical_finite", classical.finite && classical.report.converged());
    table.set_metric("reference_ratio", reference);
    Ok(table)
}

/// `‖f_t‖` and `‖f_t - f‖` along an increasing schedule `t ↑ 1`.
pub fn dilation_study(f: &AnalyticFunction, p: HardyExponent, u: &Exhaustion, t_seq: &[f64], tol: f64) -> Result<ConvergenceTable> {
    check_dilations(t_seq)?;
    let full = require_member(f, p, u, tol)?;
    let pv = p.value();
    let singular = f.singular_angles();
    let mut table = ConvergenceTable::new("dilation");
    for &t in t_seq {
        let ft = f.dilate(t)?;
        let n = norm_boundary(&ft, p, u, tol);
        table.push("norm", t, n.value, full.value, n.report.est_error, n.report.converged());
        let diff = norm_boundary_trace(
            |theta| match trace_or_infinite(f, theta) {
                Some(v) => (ft.eval_raw(Complex64::from_polar(1.0, theta)) - v).norm().powf(pv),
                None => f64::INFINITY,
            },
            &singular,
            u,
            p,
            tol,
        );
        table.push("difference", t, diff.value, 0.0, norm_error(&diff), diff.report.converged());
    }
    let a = table.is_nondecreasing("norm");
    let b = table.is_nonincreasing("difference");
    table.set_flag("norm_nondecreasing", a);
    table.set_flag("difference_nonincreasing", b);
    Ok(table)
}

/// Error estimate of a norm from the estimate for its `p`-th power.
fn norm_error(n: &NormResult) -> f64 {
    let pv = n.p.value();
    let power = n.pth_power();
    if power <= 0.0 {
        return n.report.est_error.powf(1.0 / pv);
    }
    // |a^{1/p} - b^{1/p}| ≤ |a - b|^{1/p} for p ≥ 1, and ≈ |a - b| a^{1/p-1}/p otherwise
    let linear = n.report.est_error * power.powf(1.0 / pv - 1.0) / pv;
    if pv >= 1.0 {
        linear.min(n.report.est_error.powf(1.0 / pv))
    } else {
        linear
    }
}

/// `‖f‖^p_{H^p_{u_k}}` for `u_k = G(·, t_k)`, the exhaustions concentrating at `1`.
///
/// Metric `first_exit_parameter` is the first `t_k` whose row exceeds `1` (`NaN` if none) and
/// metric `exits_ball` is `1` when such a row exists.
pub fn canonical_ball_experiment(f: &AnalyticFunction, p: HardyExponent, t_seq: &[f64], tol: f64) -> Result<ConvergenceTable> {
    check_dilations(t_seq)?;
    let reference = f.boundary_modulus_pow(0.0, p.value());
    let mut table = ConvergenceTable::new("balls");
    let mut first_exit = None;
    for (k, &t) in t_seq.iter().enumerate() {
        let u = Exhaustion::green_atom(Complex64::new(t, 0.0))?;
        let n = norm_boundary(f, p, &u, tol);
        table.push("norm-p", t, n.pth_power(), reference, n.report.est_error, n.report.converged());
        if first_exit.is_none() && n.pth_power() > 1.0 {
            first_exit = Some((k, t));
        }
    }
    table.set_metric("exits_ball", if first_exit.is_some() { 1.0 } else { 0.0 });
    table.set_metric("first_exit_parameter", first_exit.map_or(f64::NAN, |(_, t)| t));
    table.set_metric("first_exit_index", first_exit.map_or(f64::NAN, |(k, _)| k as f64));
    Ok(table)
}

/// Pairings `∫ φ h dμ_{u,r}` with `h = Re f` by the contour route, against the boundary
/// reference `∫ φ h* dμ_u`. Series `pairing` uses `φ`, series `unit` uses `φ ≡ 1`.
///
/// Levels that turn out to be critical values are nudged upward in steps of `1e-9`; the row
/// records the level actually used.
pub fn weakstar_study(
    u: &Exhaustion,
    f: &AnalyticFunction,
    phi: &TestField,
    p: HardyExponent,
    r_seq: &[f64],
    grid_n: usize,
    tol: f64,
) -> Result<ConvergenceTable> {
    let p = HardyExponent::harmonic(p.value())?;
    check_increasing_levels(r_seq)?;
    let singular = f.singular_angles();
    let re_trace = |theta: f64| trace_or_infinite(f, theta).map_or(f64::INFINITY, |v| v.re);
    let hnorm = norm_boundary_trace(|t| re_trace(t).abs().powf(p.value()), &singular, u, p, tol);
    if !hnorm.finite {
        return Err(Error::Precondition("Re f is not in h^p_u: its boundary norm diverges".into()));
    }
    let reference = u.boundary_pair(|t| phi.value(Complex64::from_polar(1.0, t)) * re_trace(t), &singular, tol);
    let unit_reference = u.boundary_pair(re_trace, &singular, tol);
    let mut table = ConvergenceTable::new("weakstar");
    for &r in r_seq {
        let mut level = r;
        let mut nudges = 0;
        let (pairing, unit) = loop {
            let pairing = mu_pair_contour(u, level, |z| phi.value(z) * f.eval_raw(z).re, grid_n);
            let result = pairing.and_then(|a| Ok((a, mu_pair_contour(u, level, |z| f.eval_raw(z).re, grid_n)?)));
            match result {
                Err(Error::DegenerateLevel { .. }) if nudges < MAX_NUDGES && level + LEVEL_NUDGE < 0.0 => {
                    level += LEVEL_NUDGE;
                    nudges += 1;
                }
                other => break other?,
            }
        };
        table.push("pairing", level, pairing.value, reference.value, pairing.report.est_error + reference.est_error, pairing.report.converged());
        table.push("unit", level, unit.value, unit_reference.value, unit.report.est_error + unit_reference.est_error, unit.report.converged());
    }
    let errors: Vec<(f64, f64)> = table.series("pairing").map(|row| (row.abs_error, row.est_error)).collect();
    let decreasing = errors.windows(2).all(|w| w[1].0 <= w[0].0 + w[1].1);
    table.set_flag("error_nonincreasing", decreasing);
    table.set_metric("reference", reference.value);
    table.set_metric("final_error", errors.last().map_or(f64::NAN, |e| e.0));
    Ok(table)
}

/// `(Σ_{k>n} |b_k|²)^{1/2}` for the Taylor coefficients `b_k` of `f_t`, truncated after
/// 4096 further terms: the classical `H²` distance from `f_t` to its degree-`n` section.
pub fn section_tail(f: &AnalyticFunction, t: f64, n: usize) -> Result<f64> {
    let ft = f.dilate(t)?;
    let full = ft.taylor_section(n + TAIL_TERMS);
    Ok(full.poly().iter().skip(n + 1).map(|b| b.norm_sqr()).sum::<f64>().sqrt())
}

/// Distances from the sections `S_n(f_t)` to `f` along a schedule of `(t, n)`.
///
/// Series `total` is `‖S_n(f_t) - f‖`, series `section` is `‖S_n(f_t) - f_t‖` and series
/// `dilation` is `‖f_t - f‖`. For `u = log|z|` and `p = 2` the `section` rows carry the
/// coefficient tail of `f_t` as reference, and metric `worst_section_ratio` is the largest
/// factor between a `section` row and its reference.
pub fn density_study(
    f: &AnalyticFunction,
    p: HardyExponent,
    u: &Exhaustion,
    schedule: &[(f64, usize)],
    tol: f64,
) -> Result<ConvergenceTable> {
    check_dilations(&schedule.iter().map(|s| s.0).collect::<Vec<_>>())?;
    require_member(f, p, u, tol)?;
    let pv = p.value();
    let singular = f.singular_angles();
    let classical_l2 = pv == 2.0 && *u == Exhaustion::log_modulus();
    let mut table = ConvergenceTable::new("density");
    for &(t, n) in schedule {
        let ft = f.dilate(t)?;
        let section = ft.taylor_section(n);
        let point = |theta: f64| Complex64::from_polar(1.0, theta);
        let total = norm_boundary_trace(
            |theta| match trace_or_infinite(f, theta) {
                Some(v) => (section.eval_raw(point(theta)) - v).norm().powf(pv),
                None => f64::INFINITY,
            },
            &singular,
            u,
            p,
            tol,
        );
        let sec = norm_boundary_trace(
            |theta| (section.eval_raw(point(theta)) - ft.eval_raw(point(theta))).norm().powf(pv),
            &[],
            u,
            p,
            tol,
        );
        let dil = norm_boundary_trace(
            |theta| match trace_or_infinite(f, theta) {
                Some(v) => (ft.eval_raw(point(theta)) - v).norm().powf(pv),
                None => f64::INFINITY,
            },
            &singular,
            u,
            p,
            tol,
        );
        let reference = if classical_l2 { section_tail(f, t, n)? } else { f64::NAN };
        table.push("total", t, total.value, 0.0, norm_error(&total), total.report.converged());
        table.push("section", t, sec.value, reference, norm_error(&sec), sec.report.converged());
        table.push("dilation", t, dil.value, 0.0, norm_error(&dil), dil.report.converged());
    }
    let a = table.is_nonincreasing("total");
    table.set_flag("total_nonincreasing", a);
    if classical_l2 {
        let worst = table.series("section").map(|r| (r.value / r.reference).max(r.reference / r.value)).fold(1.0, f64::max);
        table.set_metric("worst_section_ratio", worst);
    }
    Ok(table)
}

/// Norms of `f` for a pair `v ≤ u`; `ordered` records `‖f‖_u ≤ ‖f‖_v` within the combined
/// error estimates.
#[derive(Debug, Clone)]
pub struct NormComparison {
    pub u: NormResult,
    pub v: NormResult,
    pub ordered: bool,
}

/// Compares `‖f‖_{H^p_u}` with `‖f‖_{H^p_v}` after checking `v ≤ u` on a 100 × 100 polar grid.
pub fn norm_comparison(f: &AnalyticFunction, p: HardyExponent, u: &Exhaustion, v: &Exhaustion, tol: f64) -> Result<NormComparison> {
    for i in 0..COMPARISON_GRID {
        let radius = (i as f64 + 0.5) / COMPARISON_GRID as f64;
        for j in 0..COMPARISON_GRID {
            let z = Complex64::from_polar(radius, TAU * j as f64 / COMPARISON_GRID as f64);
            let (uz, vz) = (u.value(z), v.value(z));
            if vz > uz + 1e-12 * uz.abs().max(1.0) {
                return Err(Error::Precondition(format!("v <= u fails at {z}: v = {vz}, u = {uz}")));
            }
        }
    }
    let nu = norm_boundary(f, p, u, tol);
    let nv = norm_boundary(f, p, v, tol);
    let slack = norm_error(&nu) + norm_error(&nv) + 1e-12 * nv.value.abs();
    let ordered = nu.value <= nv.value + slack;
    Ok(NormComparison { u: nu, v: nv, ordered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::default_levels;
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(x: f64) -> HardyExponent {
        HardyExponent::new(x).unwrap()
    }

    fn one_plus_z() -> AnalyticFunction {
        AnalyticFunction::real_polynomial(&[1.0, 1.0])
    }

    #[test]
    fn dilation_examples() {
        let u = Exhaustion::green_atom(c(0.5, 0.0)).unwrap();
        let t_seq = [0.5, 0.9, 0.99];
        let table = dilation_study(&one_plus_z(), p(2.0), &u, &t_seq, 1e-12).unwrap();
        for (row, t) in table.series("norm").zip(t_seq) {
            assert!((row.value.powi(2) - (1.0 + t + t * t)).abs() < 1e-10);
        }
        for (row, t) in table.series("difference").zip(t_seq) {
            assert!((row.value - (1.0 - t)).abs() < 1e-10);
        }
        assert!(table.passed());
        let table = dilation_study(&AnalyticFunction::monomial(1), p(2.0), &Exhaustion::log_modulus(), &[0.3, 0.6], 1e-12).unwrap();
        for (row, t) in table.series("norm").zip([0.3, 0.6]) {
            assert!((row.value - t).abs() < 1e-12);
        }
        let bad = AnalyticFunction::power(c(1.0, 0.0), 0.5).unwrap();
        assert!(dilation_study(&bad, p(2.0), &u, &t_seq, 1e-10).is_err());
    }

    #[test]
    fn ball_examples() {
        let t_seq = [0.5, 0.9, 0.99, 0.999];
        let table = canonical_ball_experiment(&one_plus_z(), p(2.0), &t_seq, 1e-13).unwrap();
        for (row, t) in table.rows.iter().zip(t_seq) {
            assert!((row.value - (2.0 + 2.0 * t)).abs() < 1e-10);
            assert!((row.abs_error - 2.0 * (1.0 - t)).abs() < 1e-10);
        }
        assert_eq!(table.metrics["first_exit_parameter"], 0.5);
        let half = AnalyticFunction::constant(c(0.5, 0.0));
        let table = canonical_ball_experiment(&half, p(3.0), &t_seq, 1e-12).unwrap();
        assert_eq!(table.metrics["exits_ball"], 0.0);
        assert!(table.rows.iter().all(|r| (r.value - 0.125).abs() < 1e-12));
    }

    #[test]
    fn weakstar_examples() {
        let u = Exhaustion::green_atom(c(0.5, 0.0)).unwrap();
        let z = AnalyticFunction::monomial(1);
        let phi = TestField::modulus_power(&z, p(2.0));
        let levels = default_levels(6);
        let table = weakstar_study(&u, &z, &phi, p(2.0), &levels, 256, 1e-12).unwrap();
        for row in table.series("unit") {
            assert!((row.value - 0.5).abs() <= row.est_error.max(1e-6), "{row:?}");
        }
        assert!((table.metrics["reference"] - 0.5).abs() < 1e-12);
        assert!(table.flags["error_nonincreasing"]);
        assert!(weakstar_study(&u, &z, &phi, p(1.0), &levels, 256, 1e-12).is_err());
    }

    #[test]
    fn density_examples() {
        let f = AnalyticFunction::power(c(0.95, 0.0), 1.0).unwrap();
        let schedule: Vec<(f64, usize)> = (1..=5).map(|j| (1.0 - 0.5f64.powi(j), 1usize << j)).collect();
        let table = density_study(&f, p(2.0), &Exhaustion::log_modulus(), &schedule, 1e-13).unwrap();
        for (row, &(t, n)) in table.series("section").zip(&schedule) {
            let q: f64 = 0.95 * t;
            let tail = q.powi(n as i32 + 1) / (1.0 - q * q).sqrt();
            assert!((row.value / tail - 1.0).abs() < 1e-6, "{} vs {tail}", row.value);
            assert!((row.reference / tail - 1.0).abs() < 1e-9);
        }
        let poly = AnalyticFunction::real_polynomial(&[3.0, 1.0, -1.0]);
        let table = density_study(&poly, p(2.0), &Exhaustion::mixed(), &[(0.5, 2), (0.999, 2)], 1e-12).unwrap();
        assert!(table.values("section").iter().all(|&v| v < 1e-12));
        assert!(table.values("total")[1] < 1e-2);
    }

    #[test]
    fn comparison_examples() {
        let f = AnalyticFunction::power(c(1.0, 0.0), 0.25).unwrap();
        let u = Exhaustion::mixed();
        let same = norm_comparison(&f, p(2.0), &u, &u, 1e-12).unwrap();
        assert!(same.ordered);
        assert_eq!(same.u.value, same.v.value);
        let cmp = norm_comparison(&one_plus_z(), p(2.0), &Exhaustion::quadratic(), &Exhaustion::log_modulus(), 1e-12).unwrap();
        assert!(cmp.ordered);
        assert!((cmp.u.value - cmp.v.value).abs() < 1e-12);
        let cmp = norm_comparison(&f, p(2.0), &u, &Exhaustion::log_modulus(), 1e-12).unwrap();
        assert!(cmp.ordered);
        assert!(norm_comparison(&f, p(2.0), &Exhaustion::log_modulus(), &u, 1e-12).is_err());
    }

    #[test]
    fn strict_inclusion_ratios() {
        let f = AnalyticFunction::power(c(1.0, 0.0), 0.375).unwrap();
        let table = strict_inclusion_study(&f, p(2.0), &[8, 9, 10], 1e-10).unwrap();
        assert!((table.metrics["reference_ratio"] - SQRT_2).abs() < 1e-12);
        assert!(table.flags["ratios_in_band"]);
        assert!(table.flags["classical_finite"]);
    }
}
