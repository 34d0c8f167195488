//! Exhaustion functions of the form
//!
//! ```text
//! u(z) = Σ c_j G(z, a_j) + c_q (|z|² - 1) / 2,      Σ c_j + c_q = 1,
//! ```
//!
//! a weighted sum of Green atoms and the quadratic exhaustion. Each atom has the unit point
//! mass at its pole as Laplacian, and the quadratic part has Laplacian density `1/π`, so the
//! total Laplacian mass is one.

use std::f64::consts::{FRAC_1_PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{green_gradient, green_raw, poisson_kernel, DiskPoint, PEAK_RADIUS};
use crate::quadrature::{disk_integrate, periodic_integrate, QuadratureReport, Region, ScalarField};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const ALPHA_SAMPLES: usize = 4096;

/// A Green atom `c·G(·, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub pole: DiskPoint,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustion {
    atoms: Vec<Atom>,
    quad_weight: f64,
}

impl Exhaustion {
    pub fn new(atoms: Vec<(Complex64, f64)>, quad_weight: f64) -> Result<Self> {
        if !(quad_weight.is_finite() && quad_weight >= 0.0) {
            return Err(Error::InvalidExhaustion(format!("quadratic weight {quad_weight} must be finite and nonnegative")));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (pole, weight) in atoms {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::InvalidExhaustion(format!("atom weight {weight} must be positive")));
            }
            let pole = DiskPoint::new(pole).map_err(|_| Error::InvalidExhaustion(format!("pole {pole} is not inside the unit disk")))?;
            if out.iter().any(|a: &Atom| a.pole == pole) {
                return Err(Error::InvalidExhaustion(format!("duplicate pole {}", pole.value())));
            }
            out.push(Atom { pole, weight });
        }
        let total: f64 = out.iter().map(|a| a.weight).sum::<f64>() + quad_weight;
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidExhaustion(format!("weights sum to {total}, expected 1 (total Laplacian mass)")));
        }
        Ok(Exhaustion { atoms: out, quad_weight })
    }

    /// `G(·, a)`, the Green function with pole `a`.
    pub fn green_atom(pole: Complex64) -> Result<Self> {
        Self::new(vec![(pole, 1.0)], 0.0)
    }

    /// `log|z|`; reproduces the classical Hardy spaces.
    pub fn log_modulus() -> Self {
        Self::new(vec![(Complex64::new(0.0, 0.0), 1.0)], 0.0).expect("valid exhaustion")
    }

    /// `(|z|² - 1) / 2`, whose Laplacian is uniform on the disk.
    pub fn quadratic() -> Self {
        Self::new(Vec::new(), 1.0).expect("valid exhaustion")
    }

    /// `½ log|z| + ¼(|z|² - 1)`.
    pub fn mixed() -> Self {
        Self::new(vec![(Complex64::new(0.0, 0.0), 0.5)], 0.5).expect("valid exhaustion")
    }

    /// Truncation after `k` terms of `Σ_k 2^{-k} G(·, 1 - 4^{-k})`, weights renormalized to sum
    /// to one. The untruncated series has an unbounded boundary density.
    pub fn truncated_series(k: usize) -> Result<Self> {
        if k == 0 || k > 25 {
            return Err(Error::InvalidExhaustion(format!("truncation order {k} must lie in 1..=25")));
        }
        let raw: Vec<(Complex64, f64)> = (1..=k)
            .map(|j| (Complex64::new(1.0 - 0.25f64.powi(j as i32), 0.0), 0.5f64.powi(j as i32)))
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        Self::new(raw.into_iter().map(|(a, w)| (a, w / total)).collect(), 0.0)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn quad_weight(&self) -> f64 {
        self.quad_weight
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.atoms.iter().map(|a| a.pole.value()).collect()
    }

    /// Angles of poles close enough to the circle to make `α_u` sharply peaked.
    pub fn boundary_breakpoints(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .map(|a| a.pole.value())
            .filter(|p| p.norm() > PEAK_RADIUS)
            .map(|p| p.im.atan2(p.re))
            .collect()
    }

    /// `u(z)`; `-∞` at a pole.
    pub fn eval_u(&self, z: DiskPoint) -> f64 {
        self.value(z.value())
    }

    /// `u` without the disk check; positive outside the closed disk.
    pub fn eval_raw(&self, z: Complex64) -> f64 {
        self.value(z)
    }

    pub(crate) fn gradient_norm(&self, z: Complex64) -> f64 {
        self.gradient(z).norm()
    }

    pub fn grad_u(&self, z: DiskPoint) -> Result<Complex64> {
        let zv = z.value();
        if self.atoms.iter().any(|a| a.pole.value() == zv) {
            return Err(Error::Domain(format!("gradient of u requested at its pole {zv}")));
        }
        Ok(self.gradient(zv))
    }

    /// `α_u(θ) = Σ c_j P(a_j, e^{iθ}) + c_q`.
    pub fn alpha_at(&self, theta: f64) -> f64 {
        self.quad_weight + self.atoms.iter().map(|a| a.weight * poisson_kernel(a.pole.value(), theta)).sum::<f64>()
    }

    /// Pointwise lower bound `c_q + Σ c_j (1 - |a_j|)/(1 + |a_j|)` from the Poisson kernel bound.
    pub fn alpha_lower_bound(&self) -> f64 {
        self.quad_weight
            + self
                .atoms
                .iter()
                .map(|a| {
                    let r = a.pole.value().norm();
                    a.weight * (1.0 - r) / (1.0 + r)
                })
                .sum::<f64>()
    }

    pub fn alpha(&self, tol: f64) -> BoundaryDensity {
        let mass = periodic_integrate(|t| self.alpha_at(t), &self.boundary_breakpoints(), tol);
        let lower_bound = (0..ALPHA_SAMPLES)
            .map(|k| self.alpha_at(TAU * k as f64 / ALPHA_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min);
        BoundaryDensity { exhaustion: self.clone(), l1_mass: mass.value, mass_report: mass, lower_bound }
    }

    /// `p_r(θ) = ∫_{u<r} P(z, e^{iθ}) Δu(z)`, the Poisson mass of the sublevel set.
    pub fn p_r(&self, r: f64, theta: f64, tol: f64) -> Result<QuadratureReport> {
        if r.is_nan() || r >= 0.0 {
            return Err(Error::Domain(format!("level r = {r} must be negative")));
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| self.value(a.pole.value()) < r)
            .map(|a| a.weight * poisson_kernel(a.pole.value(), theta))
            .sum();
        let mut report = QuadratureReport::exact(atoms);
        if self.quad_weight > 0.0 {
            let region = Region::sublevel(self, r);
            let area = disk_integrate(|z| FRAC_1_PI * poisson_kernel(z, theta), &region, &self.poles(), tol);
            report = report.combine(area.scaled(self.quad_weight));
        }
        Ok(report)
    }

    /// `∫ g dμ_u = ∫ g α_u dλ`.
    pub fn boundary_pair<G: Fn(f64) -> f64>(&self, g: G, singular_angles: &[f64], tol: f64) -> QuadratureReport {
        let mut breaks = singular_angles.to_vec();
        breaks.extend(self.boundary_breakpoints());
        periodic_integrate(|t| g(t) * self.alpha_at(t), &breaks, tol)
    }

    pub fn to_record(&self) -> ExhaustionRecord {
        ExhaustionRecord {
            atoms: self.atoms.iter().map(|a| [a.pole.value().re, a.pole.value().im, a.weight]).collect(),
            quad_weight: self.quad_weight,
        }
    }
}

impl ScalarField for Exhaustion {
    /// Also defined outside the disk, where it is the analytic continuation of each part
    /// (and positive).
    fn value(&self, z: Complex64) -> f64 {
        let mut u = 0.5 * self.quad_weight * (z.norm_sqr() - 1.0);
        for a in &self.atoms {
            let g = green_raw(z, a.pole.value());
            if g == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            u += a.weight * g;
        }
        u
    }

    fn gradient(&self, z: Complex64) -> Complex64 {
        let mut g = self.quad_weight * z;
        for a in &self.atoms {
            g += a.weight * green_gradient(z, a.pole.value());
        }
        g
    }
}

/// `α_u` together with its mass and sampled lower bound.
#[derive(Debug, Clone)]
pub struct BoundaryDensity {
    exhaustion: Exhaustion,
    pub l1_mass: f64,
    pub mass_report: QuadratureReport,
    /// Minimum over equispaced samples; not a certified bound.
    pub lower_bound: f64,
}

impl BoundaryDensity {
    pub fn eval(&self, theta: f64) -> f64 {
        self.exhaustion.alpha_at(theta)
    }
}

/// Plain-text form of an exhaustion: `(re, im, weight)` triples and the quadratic weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionRecord {
    #[serde(default)]
    pub atoms: Vec<[f64; 3]>,
    #[serde(default)]
    pub quad_weight: f64,
}

impl TryFrom<&ExhaustionRecord> for Exhaustion {
    type Error = Error;

    fn try_from(rec: &ExhaustionRecord) -> Result<Self> {
        Exhaustion::new(rec.atoms.iter().map(|[re, im, w]| (Complex64::new(*re, *im), *w)).collect(), rec.quad_weight)
    }
}
