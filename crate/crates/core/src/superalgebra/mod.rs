//! Exact supercommutative algebra: coefficients, graded variables, super
//! Laurent polynomials, supermatrices and sparse linear algebra.

pub mod field;
pub mod linalg;
pub mod matrix;
pub mod parse;
pub mod scalar;
pub mod vars;

pub use field::Gq;
pub use matrix::SuperMatrix;
pub use parse::parse_scalar;
pub use scalar::{Monomial, SuperScalar};
pub use vars::{Parity, Var, VarTable};
