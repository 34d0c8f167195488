//! Numerical toolkit for weighted Hardy spaces on the unit disk.
//!
//! An exhaustion `u` (a negative subharmonic function on the disk with unit Laplacian mass
//! that vanishes on the circle) defines level-set measures `μ_{u,r}` on `{u = r}`, a boundary
//! density `α_u`, and the norm `‖f‖_{H^p_u}^p = lim_{r→0⁻} μ_{u,r}(|f|^p)`. This crate
//! evaluates all of these by independent routes and runs the convergence experiments that go
//! with them.
//!
//! Module map:
//!
//! * [`kernels`]: Poisson and Green kernels of the disk.
//! * [`quadrature`]: periodic, area and contour integration engines.
//! * [`exhaustion`]: the exhaustion family, `α_u` and partial Poisson masses.
//! * [`analytic`]: the holomorphic function model.
//! * [`measures`]: pairings `μ_{u,r}(φ)` by the Lelong–Jensen and contour routes.
//! * [`hardy`]: weighted Hardy norms and the convergence experiments.

pub mod analytic;
pub mod error;
pub mod exhaustion;
pub mod hardy;
pub mod kernels;
pub mod measures;
pub mod quadrature;
pub mod table;

pub use analytic::{AnalyticFunction, BoundaryTrace, FunctionRecord, HardyExponent, PowerFactor};
pub use error::{Error, Result};
pub use exhaustion::{BoundaryDensity, Exhaustion, ExhaustionRecord};
pub use hardy::{Membership, NormResult, NormRoute, Verdict};
pub use kernels::{BoundaryAngle, DiskPoint};
pub use measures::{LevelPairing, PairingRoute, TestField};
pub use quadrature::{Convergence, PolylineContour, QuadratureReport};
pub use table::{ConvergenceTable, TableRow};

pub use num_complex::Complex64;
