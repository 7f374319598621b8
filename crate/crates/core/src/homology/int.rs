//! Integers that stay machine-sized until an operation would overflow.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Int {
    Small(i64),
    Big(BigInt),
}

impl Int {
    fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Int::Small(1) | Int::Small(-1))
    }

    pub fn cmp_abs(&self, other: &Int) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.unsigned_abs().cmp(&b.unsigned_abs()),
            _ => self.to_big().abs().cmp(&other.to_big().abs()),
        }
    }

    pub fn neg(&self) -> Int {
        match self {
            Int::Small(v) => v.checked_neg().map(Int::Small).unwrap_or_else(|| Int::Big(-BigInt::from(*v))),
            Int::Big(b) => Int::from_big(-b),
        }
    }

    /// `self - q * b`
    pub fn sub_mul(&self, q: &Int, b: &Int) -> Int {
        if let (Int::Small(a), Int::Small(q), Int::Small(b)) = (self, q, b) {
            if let Some(v) = q.checked_mul(*b).and_then(|p| a.checked_sub(p)) {
                return Int::Small(v);
            }
        }
        Int::from_big(self.to_big() - q.to_big() * b.to_big())
    }

    /// Quotient rounded toward negative infinity.
    pub fn div_floor(&self, b: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, b) {
            if !(*a == i64::MIN && *b == -1) {
                return Int::Small(a.div_floor(b));
            }
        }
        Int::from_big(self.to_big().div_floor(&b.to_big()))
    }

    /// Nearest quotient, keeping remainders small in absolute value.
    pub fn div_round(&self, b: &Int) -> Int {
        let q = self.div_floor(b);
        let r = self.sub_mul(&q, b);
        // r has the sign of b; step once if it exceeds |b|/2
        let twice = r.sub_mul(&Int::Small(-1), &r);
        if twice.cmp_abs(b) == Ordering::Greater {
            q.sub_mul(&Int::Small(-1), &Int::Small(1))
        } else {
            q
        }
    }

}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v)
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        Int::from_big(v)
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}
