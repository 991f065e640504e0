//! Exact computer algebra for complex supermanifolds.
//!
//! The crate covers super Laurent polynomials with ℚ(i) coefficients,
//! supermatrices and Berezinians, atlases with their BV total spaces
//! (parity-shifted cotangent bundles), Čech classes on two-chart covers of the
//! projective line, and the mixed forms on which the odd symplectic form and
//! the semidensity Laplacian act.

pub mod atlas;
pub mod bvforms;
pub mod cech;
pub mod error;
pub mod examples;
pub mod report;
pub mod suites;
pub mod superalgebra;

pub use error::{Error, Result};
