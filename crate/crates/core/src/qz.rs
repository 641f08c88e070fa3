//! Exact elements of ℚ/ℤ.
//!
//! Every U(1) phase in the library is stored additively as a reduced
//! fraction `p/q` with `0 <= p < q` and `gcd(p, q) = 1`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QZ {
    num: i64,
    den: i64,
}

impl QZ {
    pub const ZERO: QZ = QZ { num: 0, den: 1 };

    /// The class of `p/q` modulo 1. Panics if `q == 0`.
    pub fn new(p: i64, q: i64) -> QZ {
        assert!(q != 0, "QZ denominator must be nonzero");
        Self::from_i128(p as i128, q as i128)
    }

    fn from_i128(p: i128, q: i128) -> QZ {
        let (mut p, mut q) = if q < 0 { (-p, -q) } else { (p, q) };
        p = p.rem_euclid(q);
        let g = p.gcd(&q);
        if g > 1 {
            p /= g;
            q /= g;
        }
        let den = i64::try_from(q).expect("QZ denominator overflow");
        QZ { num: p as i64, den }
    }

    pub fn zero() -> QZ {
        QZ::ZERO
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn scale(self, k: i64) -> QZ {
        let k = (k as i128).rem_euclid(self.den as i128);
        Self::from_i128(k * self.num as i128, self.den as i128)
    }

    pub fn scale_big(self, k: &BigInt) -> QZ {
        let r = k.mod_floor(&BigInt::from(self.den));
        // r < den fits in i64
        self.scale(r.to_i64().expect("residue fits"))
    }

    /// The canonical half `p/(2q)`; the other half differs by 1/2.
    pub fn halve(self) -> QZ {
        self.div_int(2)
    }

    /// The canonical solution `p/(q*s)` of `s*x = self`, for `s != 0`.
    pub fn div_int(self, s: i64) -> QZ {
        assert!(s != 0, "division by zero in QZ");
        let q = (self.den as i128) * (s as i128);
        Self::from_i128(self.num as i128, q)
    }

    /// Same as [`QZ::div_int`] for arbitrary-precision divisors.
    pub fn div_big(self, s: &BigInt) -> Result<QZ> {
        let sign = if s.is_negative() { -1 } else { 1 };
        let s = s.abs().to_i64().ok_or(Error::Overflow("QZ division"))?;
        (self.den as i128)
            .checked_mul(s as i128)
            .filter(|q| *q <= i64::MAX as i128)
            .ok_or(Error::Overflow("QZ division"))?;
        Ok(self.div_int(sign * s))
    }

    /// Additive order in ℚ/ℤ.
    pub fn order(&self) -> i64 {
        self.den
    }

    /// Value as an `f64` in `[0, 1)`, for display only.
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for QZ {
    fn default() -> Self {
        QZ::ZERO
    }
}

impl Add for QZ {
    type Output = QZ;
    fn add(self, rhs: QZ) -> QZ {
        if rhs.num == 0 {
            return self;
        }
        if self.num == 0 {
            return rhs;
        }
        if self.den == rhs.den {
            let d = self.den;
            let mut p = self.num + rhs.num;
            if p >= d {
                p -= d;
            }
            let g = p.gcd(&d);
            return QZ { num: p / g, den: d / g };
        }
        let l = (self.den as i128).lcm(&(rhs.den as i128));
        let p = self.num as i128 * (l / self.den as i128) + rhs.num as i128 * (l / rhs.den as i128);
        QZ::from_i128(p, l)
    }
}

impl AddAssign for QZ {
    fn add_assign(&mut self, rhs: QZ) {
        *self = *self + rhs;
    }
}

impl Neg for QZ {
    type Output = QZ;
    fn neg(self) -> QZ {
        if self.num == 0 {
            self
        } else {
            QZ { num: self.den - self.num, den: self.den }
        }
    }
}

impl Sub for QZ {
    type Output = QZ;
    fn sub(self, rhs: QZ) -> QZ {
        self + (-rhs)
    }
}

impl SubAssign for QZ {
    fn sub_assign(&mut self, rhs: QZ) {
        *self = *self - rhs;
    }
}

impl Sum for QZ {
    fn sum<I: Iterator<Item = QZ>>(iter: I) -> QZ {
        iter.fold(QZ::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for QZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for QZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for QZ {
    type Err = Error;

    fn from_str(s: &str) -> Result<QZ> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a fraction: {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0 {
                    return Err(bad());
                }
                Ok(QZ::new(p, q))
            }
            None => {
                let p: i64 = s.parse().map_err(|_| bad())?;
                Ok(QZ::new(p, 1))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> QZ {
        QZ::new(p, d)
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(q(1, 2) + q(2, 3), q(1, 6));
        assert_eq!(-q(1, 3), q(2, 3));
        assert_eq!(q(1, 3).halve(), q(1, 6));
        assert_eq!(q(1, 2).scale(2), QZ::ZERO);
        assert_eq!(q(1, 3).scale(-1), q(2, 3));
    }

    #[test]
    fn canonical_form() {
        let x = q(-7, 6);
        assert_eq!((x.numerator(), x.denominator()), (5, 6));
        let z = q(4, 2);
        assert_eq!((z.numerator(), z.denominator()), (0, 1));
        assert_eq!(q(3, -4), q(1, 4));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(q(1, 3).to_string(), "1/3");
        assert_eq!(QZ::ZERO.to_string(), "0");
        assert_eq!("2/6".parse::<QZ>().unwrap(), q(1, 3));
        assert_eq!("0".parse::<QZ>().unwrap(), QZ::ZERO);
        assert!("1/0".parse::<QZ>().is_err());
        assert!("x".parse::<QZ>().is_err());
    }

    #[test]
    fn big_scaling_and_division() {
        let k = BigInt::from(10i64).pow(30) + 1;
        assert_eq!(q(1, 7).scale_big(&k), q(1, 7).scale(((10i128.pow(30) + 1) % 7) as i64));
        assert_eq!(q(1, 2).div_big(&BigInt::from(-3)).unwrap().scale(-3), q(1, 2));
    }

    fn arb_qz() -> impl Strategy<Value = QZ> {
        (-1000i64..1000, 1i64..60).prop_map(|(p, d)| QZ::new(p, d))
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_qz(), b in arb_qz(), c in arb_qz()) {
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a + (-a), QZ::ZERO);
            prop_assert_eq!(a.halve() + a.halve(), a);
            prop_assert!(a.numerator() >= 0 && a.numerator() < a.denominator());
            prop_assert_eq!(a.numerator().gcd(&a.denominator()), 1);
        }

        #[test]
        fn scaling_is_repeated_addition(a in arb_qz(), k in 0i64..20) {
            let sum: QZ = std::iter::repeat_n(a, k as usize).sum();
            prop_assert_eq!(a.scale(k), sum);
            prop_assert_eq!(a.scale(-k), -sum);
        }
    }
}
