//! Error types shared across the crate.

use thiserror::Error;

use crate::geometry::AdmissibilityFailure;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Cell construction rejected (non-positive edge, extreme aspect ratio,
    /// splitting parameter outside its admissible range).
    #[error("invalid cell: {0}")]
    InvalidCell(String),

    /// The lattice-sum Fourier series has no zero-frequency term.
    #[error("zero frequency: the Green's function series excludes z = (0, 0)")]
    ZeroFrequency,

    /// Evaluation point coincides with a lattice point, where the kernel is
    /// singular.
    #[error("singular evaluation: point ({0}, {1}) lies on the lattice")]
    LatticeSingularity(f64, f64),

    /// Geometry failed the admissibility checks.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(AdmissibilityFailure),

    /// Vector/matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Target point coincides with a quadrature node (or one of its lattice
    /// translates).
    #[error("singular target: point ({0}, {1}) coincides with a boundary node")]
    SingularTarget(f64, f64),

    /// The discrete boundary operator could not be solved to tolerance. A
    /// well-posed geometry never triggers this; it signals a geometry or
    /// quadrature bug upstream.
    #[error("singular operator: {0}")]
    SingularOperator(String),

    /// Evaluation point lies strictly inside a hole, outside the domain of
    /// the solution.
    #[error("domain error: point ({0}, {1}) lies inside a hole")]
    OutsideDomain(f64, f64),

    /// A parameter family hit an inadmissible configuration at sample
    /// parameter `t`.
    #[error("family invalid at t = {t}: {reason}")]
    FamilyInvalid { t: f64, reason: String },

    /// Too few Chebyshev coefficients above the noise floor to fit a decay
    /// rate.
    #[error("insufficient data: {0} usable coefficients, need at least 6")]
    InsufficientData(usize),

    /// Input value rejected (NaN datum, bad degree, bad node count, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
