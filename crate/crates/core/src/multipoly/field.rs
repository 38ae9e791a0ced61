//! The coefficient field Q(rho), where rho is a primitive sixth root of unity.
//!
//! Elements are stored as `rat + rho_part * rho` and every product is reduced
//! with `rho^2 = rho - 1`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldElem {
    rat: BigRational,
    rho: BigRational,
}

/// Operation selector for [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` to `a` and `b`; division by zero is a domain error.
pub fn field_arith(a: &FieldElem, b: &FieldElem, op: FieldOp) -> Result<FieldElem> {
    Ok(match op {
        FieldOp::Add => a + b,
        FieldOp::Sub => a - b,
        FieldOp::Mul => a * b,
        FieldOp::Div => a.checked_div(b)?,
    })
}

impl FieldElem {
    pub fn new(rat: BigRational, rho: BigRational) -> Self {
        FieldElem { rat, rho }
    }

    pub fn zero() -> Self {
        FieldElem::default()
    }

    pub fn one() -> Self {
        FieldElem::from_int(1)
    }

    /// The generator rho.
    pub fn rho() -> Self {
        FieldElem { rat: BigRational::zero(), rho: BigRational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        FieldElem { rat: BigRational::from_integer(BigInt::from(n)), rho: BigRational::zero() }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        FieldElem { rat: BigRational::from_integer(n), rho: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        FieldElem {
            rat: BigRational::new(BigInt::from(num), BigInt::from(den)),
            rho: BigRational::zero(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        FieldElem { rat: r, rho: BigRational::zero() }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn rho_part(&self) -> &BigRational {
        &self.rho
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.rho.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rat.is_one() && self.rho.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.rho.is_zero()
    }

    /// Returns the value as an integer when it is a rational integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        (self.rho.is_zero() && self.rat.is_integer()).then(|| self.rat.to_integer())
    }

    /// Complex conjugation, which maps rho to rho^5 = 1 - rho.
    pub fn conj(&self) -> Self {
        FieldElem { rat: &self.rat + &self.rho, rho: -&self.rho }
    }

    /// Field norm `a^2 + ab + b^2` of `a + b rho`.
    pub fn norm(&self) -> BigRational {
        &self.rat * &self.rat + &self.rat * &self.rho + &self.rho * &self.rho
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return domain("division by zero in Q(rho)");
        }
        if self.rho.is_zero() {
            return Ok(FieldElem::from_rational(self.rat.recip()));
        }
        let n = self.norm();
        let c = self.conj();
        Ok(FieldElem { rat: c.rat / &n, rho: c.rho / n })
    }

    pub fn checked_div(&self, other: &FieldElem) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = FieldElem::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        FieldElem { rat: &self.rat * &k, rho: &self.rho * &k }
    }

    /// Square root with a positive rational part, when one exists in Q(rho).
    ///
    /// Only rational squares and rational multiples of rho squared are
    /// recognised; the series code only ever needs rational radicands.
    pub fn sqrt(&self) -> Option<Self> {
        if self.rho.is_zero() {
            return rational_sqrt(&self.rat).map(FieldElem::from_rational);
        }
        // (y rho)^2 = y^2 (rho - 1)
        if (&self.rat + &self.rho).is_zero() {
            let y = rational_sqrt(&self.rho)?;
            return Some(FieldElem { rat: BigRational::zero(), rho: y });
        }
        None
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| BigRational::new(n, d))
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rho.is_zero() {
            return write!(f, "{}", self.rat);
        }
        let rho = if self.rho.is_one() {
            "rho".to_string()
        } else if (-&self.rho).is_one() {
            "-rho".to_string()
        } else {
            format!("{}*rho", self.rho)
        };
        if self.rat.is_zero() {
            write!(f, "{rho}")
        } else if rho.starts_with('-') {
            write!(f, "{}{}", self.rat, rho)
        } else {
            write!(f, "{}+{}", self.rat, rho)
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElem({self})")
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::from_int(n)
    }
}

impl Add<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn add(self, o: &FieldElem) -> FieldElem {
        FieldElem { rat: &self.rat + &o.rat, rho: &self.rho + &o.rho }
    }
}

impl Sub<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &FieldElem) -> FieldElem {
        FieldElem { rat: &self.rat - &o.rat, rho: &self.rho - &o.rho }
    }
}

impl Mul<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn mul(self, o: &FieldElem) -> FieldElem {
        if self.rho.is_zero() && o.rho.is_zero() {
            return FieldElem { rat: &self.rat * &o.rat, rho: BigRational::zero() };
        }
        // (a + b rho)(c + d rho) = ac - bd + (ad + bc + bd) rho
        let bd = &self.rho * &o.rho;
        FieldElem {
            rat: &self.rat * &o.rat - &bd,
            rho: &self.rat * &o.rho + &self.rho * &o.rat + bd,
        }
    }
}

impl Div<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn div(self, o: &FieldElem) -> FieldElem {
        self.checked_div(o).expect("division by zero in Q(rho)")
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { rat: -&self.rat, rho: -&self.rho }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { rat: -self.rat, rho: -self.rho }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                (&self).$m(&o)
            }
        }
        impl $tr<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: &FieldElem) -> FieldElem {
                (&self).$m(o)
            }
        }
        impl $tr<FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&FieldElem> for FieldElem {
    fn add_assign(&mut self, o: &FieldElem) {
        self.rat += &o.rat;
        if !o.rho.is_zero() {
            self.rho += &o.rho;
        }
    }
}

impl SubAssign<&FieldElem> for FieldElem {
    fn sub_assign(&mut self, o: &FieldElem) {
        self.rat -= &o.rat;
        if !o.rho.is_zero() {
            self.rho -= &o.rho;
        }
    }
}

impl MulAssign<&FieldElem> for FieldElem {
    fn mul_assign(&mut self, o: &FieldElem) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_squared_reduces() {
        let r = FieldElem::rho();
        assert_eq!(&r * &r, FieldElem::rho() - FieldElem::one());
        assert_eq!(r.pow(3), FieldElem::from_int(-1));
        assert_eq!(r.pow(6), FieldElem::one());
        let mut acc = FieldElem::one();
        for _ in 0..6 {
            acc = &acc * &r;
        }
        assert!(acc.is_one());
    }

    #[test]
    fn inverse_of_one_plus_rho() {
        // (1 + rho)(a + b rho) = 1 solved over the basis {1, rho}:
        // a - b = 1 and a + 2b = 0, so a = 2/3, b = -1/3.
        let x = FieldElem::one() + FieldElem::rho();
        let expected = FieldElem::new(
            BigRational::new(2.into(), 3.into()),
            BigRational::new((-1).into(), 3.into()),
        );
        assert_eq!(x.inv().unwrap(), expected);
        assert!((&x * &expected).is_one());
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let e = field_arith(&FieldElem::one(), &FieldElem::zero(), FieldOp::Div);
        assert!(matches!(e, Err(crate::Error::Domain(_))));
    }

    #[test]
    fn conjugate_is_rho_to_the_fifth() {
        assert_eq!(FieldElem::rho().conj(), FieldElem::rho().pow(5));
        assert_eq!(FieldElem::rho().inv().unwrap(), FieldElem::rho().pow(5));
    }

    #[test]
    fn display_forms() {
        assert_eq!(FieldElem::from_ratio(-3, 4).to_string(), "-3/4");
        let x = FieldElem::new(BigRational::new(1.into(), 2.into()), BigRational::from_integer(3.into()));
        assert_eq!(x.to_string(), "1/2+3*rho");
        assert_eq!((-FieldElem::rho()).to_string(), "-rho");
    }

    #[test]
    fn square_roots() {
        assert_eq!(FieldElem::from_int(4).sqrt(), Some(FieldElem::from_int(2)));
        assert_eq!(FieldElem::from_ratio(9, 4).sqrt(), Some(FieldElem::from_ratio(3, 2)));
        assert_eq!(FieldElem::from_int(2).sqrt(), None);
        let y = FieldElem::rho().scale_int(3);
        assert_eq!((&y * &y).sqrt(), Some(y));
    }
}
