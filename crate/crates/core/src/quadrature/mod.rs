//! Integration engines: periodic quadrature on the circle, adaptive cell quadrature on
//! subsets of the disk, and level-curve extraction with line integration.

mod area;
mod contour;
mod gauss;
mod periodic;

pub use area::{disk_integrate, Region};
pub use contour::{contour_integrate, contour_integrate_report, level_integrate_report, trace_levelset, FnField, PolylineContour, ScalarField};
pub use gauss::{bracket_root, gauss_legendre};
pub use periodic::periodic_integrate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for integrals over the circle.
pub const DEFAULT_PERIODIC_TOL: f64 = 1e-8;
/// Default absolute tolerance for area integrals.
pub const DEFAULT_AREA_TOL: f64 = 1e-6;
/// Default marching-squares resolution.
pub const DEFAULT_GRID_N: usize = 512;

/// How a quadrature run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Converged,
    /// Refinement budget exhausted; `value` is the best estimate.
    Budget,
    /// The integrand does not decay at a declared singularity, or produced non-finite values.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub value: f64,
    pub est_error: f64,
    /// Number of quadrature nodes (periodic, contour) or leaf cells (area).
    pub cells_or_nodes: usize,
    pub status: Convergence,
}

impl QuadratureReport {
    pub fn converged(&self) -> bool {
        self.status == Convergence::Converged
    }

    pub fn into_result(self) -> Result<f64> {
        if self.converged() {
            Ok(self.value)
        } else {
            Err(Error::NotConverged { value: self.value, est_error: self.est_error })
        }
    }

    /// Sum of two independent estimates; the status is the worse of the two.
    pub fn combine(self, other: QuadratureReport) -> QuadratureReport {
        let status = match (self.status, other.status) {
            (Convergence::Divergent, _) | (_, Convergence::Divergent) => Convergence::Divergent,
            (Convergence::Budget, _) | (_, Convergence::Budget) => Convergence::Budget,
            _ => Convergence::Converged,
        };
        QuadratureReport {
            value: self.value + other.value,
            est_error: self.est_error + other.est_error,
            cells_or_nodes: self.cells_or_nodes + other.cells_or_nodes,
            status,
        }
    }

    pub fn scaled(self, factor: f64) -> QuadratureReport {
        QuadratureReport {
            value: self.value * factor,
            est_error: self.est_error * factor.abs(),
            ..self
        }
    }

    /// A value known in closed form.
    pub fn exact(value: f64) -> QuadratureReport {
        QuadratureReport { value, est_error: 0.0, cells_or_nodes: 0, status: Convergence::Converged }
    }
}
