//! Exact counting of Gelfand-Tsetlin and monotone trapezoids.
//!
//! The crate computes both counts as polynomials in the bottom row, either
//! from Pfaffians of binomial kernels or by applying difference operators,
//! and checks them against brute-force enumeration.

pub mod error;
pub mod multipoly;
pub mod powerseries;
pub mod diffops;
pub mod pfaffian;
pub mod trapezoids;
pub mod formulas;
pub mod verify;

pub use error::{Error, Result};
