//! Diophantine approximation by the semigroup Γ of integer matrices with
//! positive determinant acting on p-tuples of real vectors.

pub mod error;
pub mod experiments;
pub mod exponents;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod orbit;
pub mod scalar;

pub use error::{Error, Result};
