//! Recognition of the finite symplectic group PSp(2n,q) versus the
//! orthogonal group Ω(2n+1,q) for odd q > 3, given as a black box.
//!
//! The crate provides exact finite-field and matrix arithmetic, the
//! classical matrix groups with a product-replacement random element
//! generator, primitive-prime-divisor utilities, and the one-sided
//! Monte-Carlo recognizer itself.

pub mod arith;
pub mod error;
pub mod gf;
pub mod groups;
pub mod matrix;
pub mod recognizer;

pub use error::{Error, Result};
pub use gf::{FieldElement, FieldSpec};
pub use matrix::{GroupElement, Matrix};
