use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} lies outside the domain of the transform")]
    Domain(Complex64),

    #[error("expression has a pole at {0}")]
    Pole(Complex64),

    #[error("Newton iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// The last few iterates, most recent last.
        iterates: Vec<Complex64>,
    },

    #[error("damped Newton step could not keep the iterate in the upper half-plane (at {0})")]
    LeftHalfPlaneEscape(Complex64),

    #[error("window [{lo}, {hi}] touches a non-integrable singularity at {at}")]
    SingularWindow { lo: f64, hi: f64, at: f64 },

    #[error("moment of order {order} diverges: {reason}")]
    DivergentMoment { order: usize, reason: String },

    #[error("drift correction integral diverges: {0}")]
    NonIntegrableCorrection(String),

    #[error("kernel is not integrable against the measure: {0}")]
    NonIntegrable(String),

    #[error("parameters violate {0}")]
    Validity(String),

    #[error("no closed-form Voiculescu transform: {0}")]
    NoClosedForm(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("the Bernoulli weight a = 1/2 has no quasi-infinitely divisible triplet")]
    HalfPoint,

    #[error("nodes must be distinct and nonzero (offending value {0})")]
    DuplicateNode(String),

    #[error("pair is not certified for {0}")]
    NotCertified(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("branch selection produced {value} with non-positive imaginary part at z = {z}")]
    BranchMismatch { z: Complex64, value: Complex64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
