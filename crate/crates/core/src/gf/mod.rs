//! Arithmetic and linear algebra over GF(p^m).
//!
//! Elements are canonical integers in `[0, F)`: the base-p digits of the
//! integer are the coefficients of the element's polynomial in the basis
//! fixed by the field's reduction polynomial, least significant digit
//! first.

mod field;
mod linalg;
mod poly;

pub use field::{Fe, Field, FieldSpec, MAX_ORDER};
pub use linalg::{random_matrix, random_vec, FeMatrix, FeVec, Solution};
