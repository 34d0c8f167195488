//! Shared workloads for the benchmarks.

use num_complex::Complex64;
use pshardy_core::hardy::{norm_boundary, norm_riesz};
use pshardy_core::measures::{mu_pair_contour, mu_pair_lj};
use pshardy_core::{AnalyticFunction, Exhaustion, HardyExponent, TestField};

pub fn one_plus_z() -> AnalyticFunction {
    AnalyticFunction::real_polynomial(&[1.0, 1.0])
}

pub fn boundary_norm(u: &Exhaustion) -> f64 {
    norm_boundary(&one_plus_z(), HardyExponent::new(2.0).unwrap(), u, 1e-10).value
}

pub fn riesz_norm(u: &Exhaustion) -> f64 {
    norm_riesz(&one_plus_z(), HardyExponent::new(2.0).unwrap(), u, 1e-8).map(|n| n.value).unwrap_or(f64::NAN)
}

pub fn lelong_jensen(u: &Exhaustion, r: f64) -> f64 {
    let phi = TestField::modulus_power(&one_plus_z(), HardyExponent::new(2.0).unwrap());
    mu_pair_lj(u, r, &phi, 1e-8).map(|p| p.value).unwrap_or(f64::NAN)
}

pub fn contour(u: &Exhaustion, r: f64, grid_n: usize) -> f64 {
    mu_pair_contour(u, r, |z: Complex64| (Complex64::new(1.0, 0.0) + z).norm_sqr(), grid_n)
        .map(|p| p.value)
        .unwrap_or(f64::NAN)
}
