//! Verification of floating-point accumulation networks.
//!
//! Networks of TwoSum gates are simulated exactly ([`fpan`], [`softfloat`]),
//! abstracted into sign/exponent/bit-run domains ([`abstraction`]) and checked
//! by reduction to linear integer arithmetic ([`smt`]) using a catalog of
//! TwoSum transfer lemmas ([`lemmas`]). Exhaustive search at small precision
//! ([`oracle`]) cross-checks every step.

pub mod abstraction;
pub mod fpan;
pub mod lemmas;
pub mod oracle;
pub mod smt;
pub mod softfloat;

pub use abstraction::{AbstractVal, Domain, Relation};
pub use fpan::{builtin, Fpan};
pub use softfloat::{ExactReal, FloatVal, FormatParams, SmallDyadic};
