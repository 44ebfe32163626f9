//! Numerical convex geometry of separable multipartite states.
//!
//! The crate computes dimensions of faces of the separable set, applies the
//! partial-transpose group to Hermitian operators, builds and checks a
//! one-parameter family of two-qutrit entanglement witnesses, and certifies
//! boundary states. Everything runs in dense double precision on systems of
//! total dimension up to about a hundred.

pub mod catalog;
pub mod enumerate;
pub mod error;
pub mod faces;
pub mod herm;
pub mod linalg;
pub mod multilinear;
pub mod report;
pub mod witness;

pub use error::{Error, Result};
pub use herm::{HermOp, TolPolicy, TransposeMask};
pub use multilinear::{ComplexVector, ProductVector, SystemShape};
