use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0} does not lie in the open unit disk")]
    OutsideDisk(Complex64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid exhaustion: {0}")]
    InvalidExhaustion(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("level {level} is not a regular value (min |grad u| on contour = {min_gradient:e})")]
    DegenerateLevel { level: f64, min_gradient: f64 },

    #[error("level set component has only {vertices} vertices at grid_n = {grid_n}; increase the grid")]
    UnresolvedContour { vertices: usize, grid_n: usize },

    #[error("quadrature did not converge (best estimate {value}, estimated error {est_error:e})")]
    NotConverged { value: f64, est_error: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
