use alloc::string::String;

use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {triangle} (zero area)")]
    DegenerateElement { triangle: usize },

    #[error("mesh has no interior vertices")]
    EmptySystem,

    /// A pivot fell below the relative threshold during factorization.
    #[error("near-singular matrix: pivot {index} has magnitude {magnitude:e}")]
    NearSingular { index: usize, magnitude: f64 },

    /// `z` is numerically an eigenvalue, so `F_h(z)` cannot be inverted.
    #[error("shift {z} is too close to an eigenvalue")]
    EigenvalueProximity { z: Complex64 },

    /// A quadrature node kept landing on an eigenvalue after all radius nudges.
    #[error("contour node {z} collides with an eigenvalue")]
    ContourCollision { z: Complex64 },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("search at n = {n} found {found} estimates in the target window")]
    AmbiguousTarget { n: usize, found: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
