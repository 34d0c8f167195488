//! Holomorphic functions of the form `poly(z) · ∏ (1 - c_k z)^{-γ_k}` with `|c_k| ≤ 1`.
//!
//! Each factor uses the principal branch, which equals `1` at the origin and is continuous on
//! the disk because `1 - c z` stays in the right half-plane. A factor with `|c| = 1` is singular
//! at the boundary angle `arg c̄`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::DiskPoint;

/// Factors with `||c| - 1|` below this are treated as lying on the unit circle.
const UNIT_CIRCLE_TOL: f64 = 1e-14;
/// Polynomial roots this close to a singular boundary point cancel part of its order.
const ROOT_MATCH_TOL: f64 = 1e-8;

/// An exponent `p > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HardyExponent(f64);

impl HardyExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 {
            Ok(Self(p))
        } else {
            Err(Error::Domain(format!("exponent p = {p} must be positive")))
        }
    }

    /// Exponent for the harmonic spaces, which are only considered for `p > 1`.
    pub fn harmonic(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::Domain(format!("harmonic exponent p = {p} must exceed 1")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HardyExponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<HardyExponent> for f64 {
    fn from(p: HardyExponent) -> f64 {
        p.0
    }
}

/// The factor `(1 - c z)^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFactor {
    c: Complex64,
    gamma: f64,
}

impl PowerFactor {
    pub fn new(c: Complex64, gamma: f64) -> Result<Self> {
        if !(c.re.is_finite() && c.im.is_finite()) || c.norm() > 1.0 + UNIT_CIRCLE_TOL {
            return Err(Error::InvalidFunction(format!("factor parameter {c} must satisfy |c| <= 1")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidFunction(format!("factor exponent {gamma} must be positive")));
        }
        Ok(Self { c, gamma })
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn on_circle(&self) -> bool {
        (self.c.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL
    }

    /// Boundary angle where `1 - c e^{iθ}` vanishes, for factors on the circle.
    pub fn singular_angle(&self) -> Option<f64> {
        self.on_circle().then(|| (-self.c.arg()).rem_euclid(TAU))
    }

    #[inline]
    fn log_value(&self, z: Complex64) -> Complex64 {
        -self.gamma * (Complex64::new(1.0, 0.0) - self.c * z).ln()
    }

    /// `log(1 - c e^{iθ})` with the modulus and argument taken from `φ = θ + arg c`, so that
    /// angles close to the singular angle keep full relative accuracy.
    fn boundary_log_base(&self, theta: f64) -> Complex64 {
        if self.on_circle() {
            let phi = theta + self.c.arg();
            let half = (0.5 * phi).sin();
            let modulus = 2.0 * half.abs();
            let arg = (-phi.sin()).atan2(2.0 * half * half);
            Complex64::new(modulus.ln(), arg)
        } else {
            (Complex64::new(1.0, 0.0) - self.c * Complex64::from_polar(1.0, theta)).ln()
        }
    }
}

/// Value of `f*` at a boundary angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryTrace {
    Finite(Complex64),
    /// At a singular angle of a factor on the circle.
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFunction {
    poly: Vec<Complex64>,
    factors: Vec<PowerFactor>,
}

impl AnalyticFunction {
    pub fn new(poly: Vec<Complex64>, factors: Vec<PowerFactor>) -> Result<Self> {
        if poly.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidFunction("polynomial coefficients must be finite".into()));
        }
        let mut poly = poly;
        while poly.len() > 1 && poly.last() == Some(&Complex64::new(0.0, 0.0)) {
            poly.pop();
        }
        if poly.is_empty() {
            poly.push(Complex64::new(0.0, 0.0));
        }
        Ok(Self { poly, factors })
    }

    pub fn polynomial(coeffs: &[Complex64]) -> Self {
        Self::new(coeffs.to_vec(), Vec::new()).expect("finite coefficients")
    }

    /// Polynomial with real coefficients in ascending degree.
    pub fn real_polynomial(coeffs: &[f64]) -> Self {
        Self::polynomial(&coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect::<Vec<_>>())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(&[c])
    }

    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self::polynomial(&coeffs)
    }

    /// `(1 - c z)^{-γ}`.
    pub fn power(c: Complex64, gamma: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0)], vec![PowerFactor::new(c, gamma)?])
    }

    pub fn poly(&self) -> &[Complex64] {
        &self.poly
    }

    pub fn factors(&self) -> &[PowerFactor] {
        &self.factors
    }

    pub fn with_factor(mut self, factor: PowerFactor) -> Self {
        self.factors.push(factor);
        self
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn is_polynomial(&self) -> bool {
        self.factors.is_empty()
    }

    fn horner(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in self.poly.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    fn factor_product(&self, z: Complex64) -> Complex64 {
        if self.factors.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        self.factors.iter().map(|f| f.log_value(z)).sum::<Complex64>().exp()
    }

    pub fn eval(&self, z: DiskPoint) -> Complex64 {
        self.eval_raw(z.value())
    }

    /// Evaluation without the disk check; also valid on the closed disk away from singular
    /// points.
    pub fn eval_raw(&self, z: Complex64) -> Complex64 {
        self.horner(z).0 * self.factor_product(z)
    }

    pub fn deriv(&self, z: DiskPoint) -> Complex64 {
        self.deriv_raw(z.value())
    }

    /// `f' = F·(poly' + poly·Σ γ c / (1 - c z))`; the product rule form has no trouble at
    /// zeros of the polynomial.
    pub fn deriv_raw(&self, z: Complex64) -> Complex64 {
        self.value_and_deriv(z).1
    }

    pub(crate) fn value_and_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let (p, dp) = self.horner(z);
        let big_f = self.factor_product(z);
        let log_deriv: Complex64 =
            self.factors.iter().map(|f| f.gamma * f.c / (Complex64::new(1.0, 0.0) - f.c * z)).sum();
        (p * big_f, big_f * (dp + p * log_deriv))
    }

    pub fn singular_angles(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.factors.iter().filter_map(PowerFactor::singular_angle).collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    pub fn is_boundary_regular(&self) -> bool {
        self.factors.iter().all(|f| !f.on_circle())
    }

    pub fn boundary_trace(&self, theta: f64) -> BoundaryTrace {
        let mut log_f = Complex64::new(0.0, 0.0);
        for f in &self.factors {
            let base = f.boundary_log_base(theta);
            if base.re == f64::NEG_INFINITY {
                return BoundaryTrace::Infinite;
            }
            log_f += -f.gamma * base;
        }
        let p = self.horner(Complex64::from_polar(1.0, theta)).0;
        BoundaryTrace::Finite(p * log_f.exp())
    }

    /// `|f*(e^{iθ})|^p`, `+∞` at singular angles.
    pub fn boundary_modulus_pow(&self, theta: f64, p: f64) -> f64 {
        let mut log_mod = 0.0;
        for f in &self.factors {
            let base = f.boundary_log_base(theta).re;
            if base == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            log_mod -= f.gamma * base;
        }
        let poly = self.horner(Complex64::from_polar(1.0, theta)).0.norm();
        poly.powf(p) * (p * log_mod).exp()
    }

    /// `f_t(z) = f(t z)`.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("dilation parameter t = {t} must lie in (0, 1)")));
        }
        let mut scale = 1.0;
        let poly = self
            .poly
            .iter()
            .map(|&a| {
                let out = a * scale;
                scale *= t;
                out
            })
            .collect();
        let factors = self.factors.iter().map(|f| PowerFactor { c: f.c * t, gamma: f.gamma }).collect();
        Ok(Self { poly, factors })
    }

    /// Degree-`n` Taylor polynomial at the origin.
    pub fn taylor_section(&self, n: usize) -> Self {
        let mut coeffs: Vec<Complex64> = (0..=n).map(|k| self.poly.get(k).copied().unwrap_or_default()).collect();
        for f in &self.factors {
            // (1 - c z)^{-γ} = Σ b_k z^k, b_k = b_{k-1} (γ + k - 1) c / k
            let mut series = vec![Complex64::new(1.0, 0.0); n + 1];
            for k in 1..=n {
                series[k] = series[k - 1] * f.c * ((f.gamma + k as f64 - 1.0) / k as f64);
            }
            let mut next = vec![Complex64::new(0.0, 0.0); n + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (j, &b) in series.iter().enumerate().take(n + 1 - i) {
                    next[i + j] += a * b;
                }
            }
            coeffs = next;
        }
        Self::polynomial(&coeffs)
    }

    /// Density of the Laplacian measure of `|f|^p`: `(p² / 2π) |f|^{p-2} |f'|²`.
    pub fn lap_density_fp(&self, p: HardyExponent, z: DiskPoint) -> Result<f64> {
        self.lap_density_fp_raw(p.value(), z.value())
    }

    pub(crate) fn lap_density_fp_raw(&self, p: f64, z: Complex64) -> Result<f64> {
        let (f, df) = self.value_and_deriv(z);
        let m = f.norm();
        if m == 0.0 && p < 2.0 {
            return Err(Error::Domain(format!("Laplacian of |f|^{p} is singular at the zero {z}")));
        }
        Ok(p * p / (2.0 * PI) * m.powf(p - 2.0) * df.norm_sqr())
    }

    /// Zeros of the polynomial part (the factors never vanish), Newton-polished eigenvalues of
    /// the companion matrix.
    pub fn zeros(&self) -> Vec<Complex64> {
        polynomial_roots(&self.poly)
    }

    /// Zeros inside the open disk.
    pub fn disk_zeros(&self) -> Vec<Complex64> {
        self.zeros().into_iter().filter(|z| z.norm() < 1.0).collect()
    }

    /// Whether `f* ∈ L^p(λ)`: at every singular angle the net order `Σγ - (root multiplicity)`
    /// times `p` must stay below one.
    pub fn classical_hp(&self, p: f64) -> bool {
        self.excess_orders().into_iter().all(|(_, order)| order * p < 1.0)
    }

    /// `(angle, Σγ - multiplicity of polynomial roots there)` for every singular angle.
    pub fn excess_orders(&self) -> Vec<(f64, f64)> {
        let roots = self.zeros();
        self.singular_angles()
            .into_iter()
            .map(|theta| {
                let point = Complex64::from_polar(1.0, theta);
                let gamma: f64 = self
                    .factors
                    .iter()
                    .filter(|f| f.singular_angle().is_some_and(|a| angle_distance(a, theta) < 1e-14))
                    .map(|f| f.gamma)
                    .sum();
                let multiplicity = roots.iter().filter(|r| (**r - point).norm() < ROOT_MATCH_TOL).count();
                (theta, gamma - multiplicity as f64)
            })
            .collect()
    }

    pub fn to_record(&self) -> FunctionRecord {
        FunctionRecord {
            poly: self.poly.iter().map(|a| [a.re, a.im]).collect(),
            factors: self.factors.iter().map(|f| [f.c.re, f.c.im, f.gamma]).collect(),
        }
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|a| a.norm() == 0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let (_, t) = companion.schur().unpack();
    let mut roots: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    for r in &mut roots {
        for _ in 0..8 {
            let mut p = Complex64::new(0.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for &a in c.iter().rev() {
                dp = dp * *r + p;
                p = p * *r + a;
            }
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Plain-text form of a function: polynomial coefficients `[re, im]` in ascending degree and
/// factors `[re c, im c, γ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    #[serde(default)]
    pub poly: Vec<[f64; 2]>,
    #[serde(default)]
    pub factors: Vec<[f64; 3]>,
}

impl TryFrom<&FunctionRecord> for AnalyticFunction {
    type Error = Error;

    fn try_from(rec: &FunctionRecord) -> Result<Self> {
        if rec.poly.is_empty() {
            return Err(Error::InvalidFunction("polynomial part needs at least one coefficient".into()));
        }
        let factors = rec
            .factors
            .iter()
            .map(|[re, im, g]| PowerFactor::new(Complex64::new(*re, *im), *g))
            .collect::<Result<Vec<_>>>()?;
        AnalyticFunction::new(rec.poly.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(), factors)
    }
}
