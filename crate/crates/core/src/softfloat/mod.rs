//! Exact parametric-precision binary floating point with round-to-nearest-even.
//!
//! Only normalized numbers and signed zeros exist here. Subnormals,
//! infinities and NaN are rejected, and results whose exponent leaves the
//! format's range are reported as errors.

mod dyadic;
mod format;
mod ops;
mod value;

use num_bigint::BigInt;
use thiserror::Error;

pub use dyadic::{Dyadic, DyadicInt};
pub use format::{FormatParams, MAX_PRECISION};
pub use ops::{
    add, add_with, expand_constant, rne_round, sub, two_sum, two_sum_six_op, two_sum_with, ulp,
};
pub use value::FloatVal;

/// Arbitrary-precision dyadic rational.
pub type ExactReal = Dyadic<BigInt>;

/// Fixed-width dyadic rational for hot loops at small precision.
pub type SmallDyadic = Dyadic<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SoftFloatError {
    #[error("invalid format: {0}")]
    InvalidFormat(String),
    #[error("overflow: rounded exponent exceeds emax")]
    Overflow,
    #[error("underflow: result exponent below emin (subnormals are not modelled)")]
    Underflow,
    #[error("ulp is undefined for zero")]
    ZeroUlp,
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("cannot parse float literal `{0}`")]
    InvalidLiteral(String),
    #[error("literal `{0}` is not exactly representable in the format")]
    Inexact(String),
}
