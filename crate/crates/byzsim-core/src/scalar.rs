//! Exact rational scalars.
//!
//! All positions, distances and bounds in the simulator are arbitrary-precision
//! rationals kept in canonical form (reduced, positive denominator). The
//! semi-synchronous shrink factors divide by powers of two and the oscillation
//! adversary halves gaps without bound, so any fixed-precision representation
//! would make the trace checkers fail for purely numerical reasons.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number.
///
/// Text form is `p/q` with `q > 0` and `gcd(|p|, q) = 1`, or a bare integer
/// `p` when the denominator is one. This is the form used in config files,
/// trace records and CSV output.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigRational);

impl Scalar {
    /// Build `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "scalar denominator must be nonzero");
        Scalar(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(value: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    /// `1 / 2^exp`, exactly.
    pub fn inv_pow2(exp: u32) -> Self {
        Scalar(BigRational::new(BigInt::one(), BigInt::one() << exp))
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    /// `self / 2`, exactly.
    pub fn half(&self) -> Self {
        Scalar(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// -1, 0 or 1 as a plain integer.
    pub fn signum(&self) -> i32 {
        if self.0.is_positive() {
            1
        } else if self.0.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Decimal rendering with `digits` significant digits, round-half-even.
    ///
    /// Display only; the exact `p/q` form is authoritative wherever both are
    /// emitted. Uses positional notation for moderate exponents and
    /// scientific notation otherwise, and keeps trailing zeros so output
    /// width is stable across a run.
    pub fn to_decimal(&self, digits: u32) -> String {
        assert!(digits >= 1);
        if self.0.is_zero() {
            return "0".to_string();
        }
        let neg = self.0.is_negative();
        let num = self.0.numer().abs();
        let den = self.0.denom().clone();

        // Exponent e with 10^e <= |x| < 10^(e+1).
        let num_digits = num.to_string().len() as i64;
        let den_digits = den.to_string().len() as i64;
        let mut e = num_digits - den_digits;
        let pow10 = |k: i64| -> BigInt { BigInt::from(10u32).pow(k.unsigned_abs() as u32) };
        // |x| >= 10^e  <=>  num * 10^-e >= den (for either sign of e).
        let ge_pow10 = |e: i64| -> bool {
            if e >= 0 {
                num >= &den * pow10(e)
            } else {
                &num * pow10(-e) >= den
            }
        };
        if !ge_pow10(e) {
            e -= 1;
        } else if ge_pow10(e + 1) {
            e += 1;
        }

        // Mantissa m = |x| * 10^(digits-1-e), rounded half-even to an integer
        // with exactly `digits` digits.
        let shift = digits as i64 - 1 - e;
        let (scaled_num, scaled_den) = if shift >= 0 {
            (&num * pow10(shift), den.clone())
        } else {
            (num.clone(), &den * pow10(-shift))
        };
        let (q, r) = num::Integer::div_rem(&scaled_num, &scaled_den);
        let mut mantissa = q.clone();
        let twice_r = &r * BigInt::from(2);
        if twice_r > scaled_den || (twice_r == scaled_den && num::Integer::is_odd(&q)) {
            mantissa += 1;
        }
        let mut mant_str = mantissa.to_string();
        if mant_str.len() as u32 > digits {
            // Rounded up to the next power of ten.
            mant_str.truncate(digits as usize);
            e += 1;
        }

        let body = if (-4..=(digits as i64 + 2)).contains(&e) {
            if e >= 0 {
                let point = (e + 1) as usize;
                if point >= mant_str.len() {
                    format!("{}{}", mant_str, "0".repeat(point - mant_str.len()))
                } else {
                    format!("{}.{}", &mant_str[..point], &mant_str[point..])
                }
            } else {
                format!("0.{}{}", "0".repeat((-e - 1) as usize), mant_str)
            }
        } else {
            let (head, tail) = mant_str.split_at(1);
            format!("{head}.{tail}e{e}")
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error from parsing a scalar out of its `p/q` text form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scalar {input:?}: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: String,
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ParseScalarError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        if s.is_empty() {
            return Err(err("empty string"));
        }
        let (num_str, den_str) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let numer: BigInt = num_str
            .parse()
            .map_err(|_| err("numerator is not an integer"))?;
        let denom: BigInt = match den_str {
            Some(d) => d
                .parse()
                .map_err(|_| err("denominator is not an integer"))?,
            None => BigInt::one(),
        };
        if denom.is_zero() {
            return Err(err("denominator is zero"));
        }
        Ok(Scalar(BigRational::new(numer, denom)))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}
