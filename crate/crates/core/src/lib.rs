//! Character-expansion partition functions for corner-matrix models on
//! ribbon graphs, with a Monte Carlo Haar-measure oracle and KP checks.
//!
//! The symmetric-function core is generic over [`Scalar`]; the aliases below
//! fix the two evaluation paths the rest of the crate uses.

pub mod error;
pub mod io;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod partitions;
pub mod ribbon;
pub mod scalar;
pub mod suite;
pub mod symfun;
pub mod tau;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar for closed-form evaluations.
pub type Rational = num_rational::BigRational;
/// Complex double scalar for matrix and Monte Carlo paths.
pub type C64 = linalg::C64;
/// Dense complex matrix.
pub type CMatrix = linalg::CMatrix;
/// Power sums with complex double entries.
pub type ComplexPowerSums = symfun::PowerSums<C64>;
/// Power sums with exact rational entries.
pub type RationalPowerSums = symfun::PowerSums<Rational>;
