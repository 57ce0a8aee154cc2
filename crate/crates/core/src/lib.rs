//! Freely quasi-infinitely divisible laws.
//!
//! Signed Lévy data ([`measures`]), free transforms and their inversion
//! ([`transforms`]), closed-form families ([`families`]), free deconvolution
//! ([`deconvolve`]), moment–cumulant combinatorics ([`cumulants`]) and the
//! extended Bercovici–Pata map ([`bpx`]).

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpx;
pub mod cumulants;
pub mod deconvolve;
pub mod error;
pub mod families;
pub mod format;
pub mod measures;
pub mod par;
pub mod quad;
pub mod scalar;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use families::DistributionModel;
pub use measures::{FreeCharPair, FreeTriplet, QuasiLevyMeasure, SignedMeasure};
pub use transforms::{DensityGrid, PhiExpression};
