//! Poisson and Green kernels of the unit disk.
//!
//! Conventions used across the crate:
//!
//! * the boundary measure `λ` is normalized, so `∫ dλ = 1`;
//! * "Laplacian" means `(1/2π)·(∂²ₓ + ∂²ᵧ)` taken as a measure, so the Laplacian of
//!   `log|z|` is the unit point mass at the origin.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::periodic_integrate;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 {
            Ok(Self(z))
        } else {
            Err(Error::OutsideDisk(z))
        }
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn from_polar(radius: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(radius, theta))
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// An angle on the unit circle, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BoundaryAngle(f64);

impl BoundaryAngle {
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        if t >= TAU {
            t = 0.0;
        }
        Self(t)
    }

    #[inline]
    pub fn theta(self) -> f64 {
        self.0
    }

    pub fn point(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }
}

/// `1 - |z|²` evaluated as `(1 - |z|)(1 + |z|)`, which keeps full relative accuracy
/// for real points close to the circle.
#[inline]
pub(crate) fn one_minus_modulus_sq(z: Complex64) -> f64 {
    let rho = z.norm();
    (1.0 - rho) * (1.0 + rho)
}

/// Poisson kernel `P(z, e^{iθ}) = (1 - |z|²) / |e^{iθ} - z|²` for a raw point and raw angle.
///
/// The denominator is evaluated as `(1 - ρ)² + 4ρ sin²((θ - ψ)/2)` with `z = ρe^{iψ}`, which
/// stays accurate when `z` approaches `e^{iθ}`. The angle is not reduced, so offsets from a
/// breakpoint survive unrounded.
#[inline]
pub fn poisson_kernel(z: Complex64, theta: f64) -> f64 {
    let rho = z.norm();
    if rho == 0.0 {
        return 1.0;
    }
    let psi = z.im.atan2(z.re);
    let s = ((theta - psi) * 0.5).sin();
    let gap = 1.0 - rho;
    one_minus_modulus_sq(z) / (gap * gap + 4.0 * rho * s * s)
}

/// Poisson kernel of the disk, normalized so that `∫ P(z, ·) dλ = 1`.
pub fn poisson(z: DiskPoint, theta: BoundaryAngle) -> f64 {
    poisson_kernel(z.0, theta.0)
}

/// Green function `G(z, w) = log |(z - w) / (1 - w̄z)|` on raw points. `-∞` when `z == w`.
///
/// The arguments are put in a canonical order first so `green_raw(z, w)` and
/// `green_raw(w, z)` follow the identical floating-point path.
pub fn green_raw(z: Complex64, w: Complex64) -> f64 {
    let (a, b) = if (z.re, z.im) <= (w.re, w.im) { (z, w) } else { (w, z) };
    let num = (a - b).norm();
    if num == 0.0 {
        return f64::NEG_INFINITY;
    }
    // 1 - b̄a written out so that swapping a and b only conjugates the result
    let re = 1.0 - (b.re * a.re + b.im * a.im);
    let im = b.im * a.re - b.re * a.im;
    num.ln() - re.hypot(im).ln()
}

/// Green function of the disk with the logarithmic pole at `w`.
pub fn green(z: DiskPoint, w: DiskPoint) -> f64 {
    green_raw(z.0, w.0)
}

/// Gradient in `z` of `G(·, w)` as a vector packed into a complex number.
pub(crate) fn green_gradient(z: Complex64, w: Complex64) -> Complex64 {
    // ∇ log|g| = conj(g'/g) for holomorphic g
    let log_deriv = 1.0 / (z - w) + w.conj() / (1.0 - w.conj() * z);
    log_deriv.conj()
}

/// Poisson integral `∫ g(θ) P(z, e^{iθ}) dλ(θ)`.
///
/// `singular_angles` lists the angles where `g` has integrable singularities; the angle of
/// `z` is added automatically when `z` is close enough to the circle for the kernel to be
/// sharply peaked.
pub fn harmonic_extension<G>(g: G, z: DiskPoint, singular_angles: &[f64], tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let zv = z.value();
    let mut breaks = singular_angles.to_vec();
    if zv.norm() > PEAK_RADIUS {
        breaks.push(zv.im.atan2(zv.re));
    }
    let report = periodic_integrate(|t| g(t) * poisson_kernel(zv, t), &breaks, tol);
    report.into_result()
}

/// Atoms or evaluation points farther out than this get their angle declared as a
/// quadrature breakpoint.
pub(crate) const PEAK_RADIUS: f64 = 0.9;

/// Left side of the Poisson semigroup identity: `∫ P(te^{iφ}, e^{iθ}) P(z, e^{iθ}) dλ(θ)`.
/// Equals `P(tz, e^{iφ})`.
pub fn poisson_convolve(t: f64, phi: BoundaryAngle, z: DiskPoint, tol: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("dilation parameter t = {t} must lie in (0, 1)")));
    }
    let center = Complex64::from_polar(t, phi.theta());
    let breaks = if t > PEAK_RADIUS { vec![phi.theta()] } else { Vec::new() };
    harmonic_extension(|theta| poisson_kernel(center, theta), z, &breaks, tol)
}
