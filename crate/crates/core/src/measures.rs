//! Pairings `μ_{u,r}(φ)` of the level-set measures with test fields.
//!
//! The Lelong–Jensen route integrates over the sublevel set `B = {u < r}`:
//!
//! ```text
//! μ_{u,r}(φ) = ∫_B φ Δu + ∫_B (r - u) Δφ,
//! ```
//!
//! and the contour route integrates `φ |∇u| / 2π` along `{u = r}`.

use std::f64::consts::{FRAC_1_PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticFunction, HardyExponent};
use crate::error::{Error, Result};
use crate::exhaustion::Exhaustion;
use crate::quadrature::{disk_integrate, level_integrate_report, trace_levelset, QuadratureReport, Region};
use crate::table::ConvergenceTable;

type ValueFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;
type DensityFn = Arc<dyn Fn(Complex64) -> Result<f64> + Send + Sync>;

const MEAN_VALUE_TOL: f64 = 1e-6;
const PRECONDITION_GRID: usize = 64;

/// Laplacian of a test field, with respect to planar area.
#[derive(Clone)]
pub enum Laplacian {
    Harmonic,
    Density(DensityFn),
}

/// A function `φ` on the closed disk together with its Laplacian density.
#[derive(Clone)]
pub struct TestField {
    value: ValueFn,
    laplacian: Laplacian,
    singular_points: Vec<Complex64>,
}

impl fmt::Debug for TestField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestField")
            .field("harmonic", &self.is_harmonic())
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

impl TestField {
    pub fn constant(c: f64) -> Self {
        Self { value: Arc::new(move |_| c), laplacian: Laplacian::Harmonic, singular_points: Vec::new() }
    }

    /// `|f|^p`; the zeros of `f` are singular points of the density when `p < 2`.
    pub fn modulus_power(f: &AnalyticFunction, p: HardyExponent) -> Self {
        let p = p.value();
        let singular_points = if p < 2.0 { f.disk_zeros() } else { Vec::new() };
        let fv = f.clone();
        let fd = f.clone();
        Self {
            value: Arc::new(move |z| fv.eval_raw(z).norm().powf(p)),
            laplacian: Laplacian::Density(Arc::new(move |z| fd.lap_density_fp_raw(p, z))),
            singular_points,
        }
    }

    /// `Re f`.
    pub fn real_part(f: &AnalyticFunction) -> Self {
        let f = f.clone();
        Self { value: Arc::new(move |z| f.eval_raw(z).re), laplacian: Laplacian::Harmonic, singular_points: Vec::new() }
    }

    /// A field declared harmonic; the mean-value property is checked on sampled circles.
    pub fn harmonic<V: Fn(Complex64) -> f64 + Send + Sync + 'static>(value: V) -> Result<Self> {
        for (centre, radius) in [(Complex64::new(0.0, 0.0), 0.5), (Complex64::new(0.3, -0.2), 0.4), (Complex64::new(-0.4, 0.4), 0.3)] {
            let n = 256;
            let mean = (0..n).map(|k| value(centre + Complex64::from_polar(radius, TAU * k as f64 / n as f64))).sum::<f64>() / n as f64;
            let at = value(centre);
            if (mean - at).abs() > MEAN_VALUE_TOL * at.abs().max(1.0) {
                return Err(Error::Precondition(format!(
                    "field declared harmonic fails the mean-value check at {centre}: {at} vs circle mean {mean}"
                )));
            }
        }
        Ok(Self { value: Arc::new(value), laplacian: Laplacian::Harmonic, singular_points: Vec::new() })
    }

    pub fn custom<V, D>(value: V, density: D, singular_points: Vec<Complex64>) -> Self
    where
        V: Fn(Complex64) -> f64 + Send + Sync + 'static,
        D: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), laplacian: Laplacian::Density(Arc::new(move |z| Ok(density(z)))), singular_points }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        (self.value)(z)
    }

    pub fn lap_density(&self, z: Complex64) -> Result<f64> {
        match &self.laplacian {
            Laplacian::Harmonic => Ok(0.0),
            Laplacian::Density(d) => d(z),
        }
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self.laplacian, Laplacian::Harmonic)
    }

    pub fn singular_points(&self) -> &[Complex64] {
        &self.singular_points
    }

    /// Sampled check of `φ ≥ 0` and `Δφ ≥ 0` on a polar grid.
    pub fn check_nonnegative_subharmonic(&self) -> Result<()> {
        for i in 0..PRECONDITION_GRID {
            let radius = (i as f64 + 0.5) / PRECONDITION_GRID as f64;
            for j in 0..PRECONDITION_GRID {
                let z = Complex64::from_polar(radius, TAU * j as f64 / PRECONDITION_GRID as f64);
                if self.singular_points.iter().any(|s| (s - z).norm() < 1e-9) {
                    continue;
                }
                let v = self.value(z);
                if v < 0.0 {
                    return Err(Error::Precondition(format!("test field is negative ({v}) at {z}")));
                }
                let d = self.lap_density(z)?;
                if d < 0.0 {
                    return Err(Error::Precondition(format!("test field is not subharmonic: Laplacian density {d} at {z}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingRoute {
    LelongJensen,
    Contour,
}

/// The value of `μ_{u,r}(φ)` with the route that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPairing {
    pub r: f64,
    pub value: f64,
    pub route: PairingRoute,
    pub report: QuadratureReport,
}

fn check_level(r: f64) -> Result<()> {
    if r.is_finite() && r < 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("level r = {r} must be negative and finite")))
    }
}

fn merged_points(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = a.to_vec();
    for &p in b {
        if !out.iter().any(|q| (q - p).norm() < 1e-14) {
            out.push(p);
        }
    }
    out
}

/// `Σ_{a_j ∈ B} c_j φ(a_j) + c_q (1/π) ∫_B φ dA + ∫_B (r - u) Δφ`.
pub fn mu_pair_lj(u: &Exhaustion, r: f64, phi: &TestField, tol: f64) -> Result<LevelPairing> {
    check_level(r)?;
    let mut atoms = 0.0;
    for a in u.atoms() {
        let v = phi.value(a.pole.value());
        if !v.is_finite() {
            return Err(Error::Domain(format!("test field is {v} at the pole {} of u", a.pole.value())));
        }
        atoms += a.weight * v;
    }
    let mut report = QuadratureReport::exact(atoms);
    let region = Region::sublevel(u, r);
    let points = merged_points(&u.poles(), phi.singular_points());
    let parts = if u.quad_weight() > 0.0 { 2.0 } else { 1.0 };
    if u.quad_weight() > 0.0 {
        let area = disk_integrate(|z| FRAC_1_PI * phi.value(z), &region, &points, tol / parts);
        report = report.combine(area.scaled(u.quad_weight()));
    }
    if !phi.is_harmonic() {
        let jump = disk_integrate(
            |z| {
                let d = phi.lap_density(z).unwrap_or(f64::NAN);
                if d == 0.0 {
                    0.0
                } else {
                    (r - u.eval_raw(z)) * d
                }
            },
            &region,
            &points,
            tol / parts,
        );
        report = report.combine(jump);
    }
    if !report.value.is_finite() {
        return Err(Error::Domain(format!("Lelong-Jensen pairing at r = {r} is not finite")));
    }
    Ok(LevelPairing { r, value: report.value, route: PairingRoute::LelongJensen, report })
}

/// Contour route: `Σ_components ∫ φ |∇u| / 2π ds` on `{u = r}`.
pub fn mu_pair_contour<P: Fn(Complex64) -> f64>(u: &Exhaustion, r: f64, phi: P, grid_n: usize) -> Result<LevelPairing> {
    check_level(r)?;
    let contours = trace_levelset(u, r, grid_n)?;
    let mut report = QuadratureReport::exact(0.0);
    for c in &contours {
        if let Some(v) = c.vertices.iter().find(|v| u.poles().iter().any(|p| (*p - **v).norm() < 1e-9)) {
            return Err(Error::Domain(format!("level curve passes through a pole of u near {v}")));
        }
        let part = level_integrate_report(u, r, c, |z| phi(z) * u.gradient_norm(z) / TAU)?;
        report = report.combine(part);
    }
    Ok(LevelPairing { r, value: report.value, route: PairingRoute::Contour, report })
}

/// `μ_{u,r}(1) = Σ c_j + c_q · area(B)/π`.
pub fn mu_mass(u: &Exhaustion, r: f64, tol: f64) -> Result<LevelPairing> {
    mu_pair_lj(u, r, &TestField::constant(1.0), tol)
}

/// Rows `μ_{u,r}(φ)` along an increasing schedule; flag `monotone` records whether the values
/// are nondecreasing within their error estimates.
pub fn monotonicity_table(u: &Exhaustion, phi: &TestField, r_seq: &[f64], tol: f64) -> Result<ConvergenceTable> {
    phi.check_nonnegative_subharmonic()?;
    check_increasing_levels(r_seq)?;
    let mut table = ConvergenceTable::new("monotone");
    for &r in r_seq {
        let pairing = mu_pair_lj(u, r, phi, tol)?;
        table.push("mu", r, pairing.value, f64::NAN, pairing.report.est_error, pairing.report.converged());
    }
    let monotone = table.is_nondecreasing("mu");
    table.set_flag("monotone", monotone);
    Ok(table)
}

pub(crate) fn check_increasing_levels(r_seq: &[f64]) -> Result<()> {
    if r_seq.is_empty() {
        return Err(Error::Precondition("level schedule is empty".into()));
    }
    for &r in r_seq {
        check_level(r)?;
    }
    if r_seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("level schedule must be strictly increasing".into()));
    }
    Ok(())
}

/// `r_k = -2^{-k}`, `k = 1..=n`.
pub fn default_levels(n: usize) -> Vec<f64> {
    (1..=n).map(|k| -(0.5f64.powi(k as i32))).collect()
}
