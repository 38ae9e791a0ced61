//! Exact polynomials over Q(rho) and the difference calculus on them.

mod field;
mod newton;
mod parse;
mod poly;
mod sum;

pub use field::{field_arith, FieldElem, FieldOp};
pub use newton::{
    apply_difference_operator, apply_newton, binom_of, binom_poly, eval_newton, from_newton, from_newton_all,
    to_newton, to_newton_all,
};
pub use parse::parse_poly;
pub use poly::{poly_arith, Direction, MultiPoly, PolyOp};
pub use sum::definite_sum;
