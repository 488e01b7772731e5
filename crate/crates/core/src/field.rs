//! Exact coefficient fields: the rationals and prime fields `F_p` with `p < 2^31`.
//!
//! A [`Scalar`] carries its own field so that arithmetic between elements of
//! different fields is caught immediately instead of producing garbage.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible prime modulus (exclusive).
pub const MAX_PRIME: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    /// `F_p`, after checking that `p` is a prime below `2^31`.
    pub fn prime(p: u64) -> Result<Field> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        Ok(Field::Prime(p as u32))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => *p,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Field::Prime(_))
    }

    /// Number of elements, `None` for `Q`.
    pub fn size(&self) -> Option<u64> {
        match self {
            Field::Rational => None,
            Field::Prime(p) => Some(*p as u64),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => Scalar::Mod {
                value: v.rem_euclid(*p as i64) as u32,
                modulus: *p,
            },
        }
    }

    /// The residue `value mod p` (or the integer itself over `Q`).
    pub fn from_u64(&self, v: u64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => Scalar::Mod {
                value: (v % *p as u64) as u32,
                modulus: *p,
            },
        }
    }

    /// Embeds an exact rational; fails over `F_p` when `p` divides the denominator.
    pub fn from_rational(&self, q: &BigRational) -> Result<Scalar> {
        match self {
            Field::Rational => Ok(Scalar::Rat(q.clone())),
            Field::Prime(p) => {
                reduce_rational(q, *p).ok_or_else(|| Error::invalid(format!("denominator of {q} vanishes mod {p}")))
            }
        }
    }

    /// All elements of a finite field in the order `0, 1, ..., p-1`.
    pub fn elements(&self) -> Vec<Scalar> {
        match self {
            Field::Rational => Vec::new(),
            Field::Prime(p) => (0..*p).map(|value| Scalar::Mod { value, modulus: *p }).collect(),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "Fp:{p}"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Field> {
        let s = s.trim();
        if s == "Q" || s == "q" {
            return Ok(Field::Rational);
        }
        let digits = s
            .strip_prefix("Fp:")
            .or_else(|| s.strip_prefix("F"))
            .ok_or_else(|| Error::invalid(format!("unknown field `{s}`, expected Q or Fp:<p>")))?;
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::invalid(format!("bad prime in `{s}`")))?;
        Field::prime(p)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

fn reduce_rational(q: &BigRational, p: u32) -> Option<Scalar> {
    let pb = BigInt::from(p);
    let num = q.numer().mod_floor(&pb).to_u64()?;
    let den = q.denom().mod_floor(&pb).to_u64()?;
    if den == 0 {
        return None;
    }
    let value = (num * inv_mod(den, p as u64)) % p as u64;
    Some(Scalar::Mod {
        value: value as u32,
        modulus: p,
    })
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// An element of `Q` or of `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod { value: u32, modulus: u32 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rat(_) => Field::Rational,
            Scalar::Mod { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(q) => q.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(q) => q.is_one(),
            Scalar::Mod { value, .. } => *value == 1,
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Rat(q) => Scalar::Rat(q.recip()),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: inv_mod(*value as u64, *modulus as u64) as u32,
                modulus: *modulus,
            },
        })
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        let mut acc = self.field().one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Exact rational value; `None` over `F_p`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(q) => Some(q),
            Scalar::Mod { .. } => None,
        }
    }

    /// Residue in `[0, p)`; `None` over `Q`.
    pub fn residue(&self) -> Option<u32> {
        match self {
            Scalar::Rat(_) => None,
            Scalar::Mod { value, .. } => Some(*value),
        }
    }

    /// Reduction of a rational modulo `p`, `None` if `p` divides the denominator.
    /// Elements already in `F_p` are returned unchanged when the primes agree.
    pub fn reduce_mod(&self, p: u32) -> Option<Scalar> {
        match self {
            Scalar::Rat(q) => reduce_rational(q, p),
            Scalar::Mod { modulus, .. } if *modulus == p => Some(self.clone()),
            Scalar::Mod { .. } => None,
        }
    }

    /// Whether this is a square in its field (exact over `Q`, Euler's criterion over `F_p`).
    pub fn is_square(&self) -> bool {
        match self {
            Scalar::Rat(q) => {
                if q.is_negative() {
                    return false;
                }
                let n = q.numer();
                let d = q.denom();
                let rn = n.sqrt();
                let rd = d.sqrt();
                &(&rn * &rn) == n && &(&rd * &rd) == d
            }
            Scalar::Mod { value, modulus } => {
                if *value == 0 || *modulus == 2 {
                    return true;
                }
                pow_mod(*value as u64, (*modulus as u64 - 1) / 2, *modulus as u64) == 1
            }
        }
    }

    /// A square root when one exists in the field.
    pub fn sqrt(&self) -> Option<Scalar> {
        if !self.is_square() {
            return None;
        }
        match self {
            Scalar::Rat(q) => Some(Scalar::Rat(BigRational::new(q.numer().sqrt(), q.denom().sqrt()))),
            Scalar::Mod { value, modulus } => (0..*modulus)
                .find(|x| (*x as u64 * *x as u64) % *modulus as u64 == *value as u64)
                .map(|x| Scalar::Mod {
                    value: x,
                    modulus: *modulus,
                }),
        }
    }

    fn check(&self, other: &Scalar) {
        assert_eq!(
            self.field(),
            other.field(),
            "arithmetic between scalars of different fields"
        );
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn add(self, rhs: &Scalar) -> Scalar {
        self.check(rhs);
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: ((*a as u64 + *b as u64) % *modulus as u64) as u32,
                modulus: *modulus,
            },
            _ => unreachable!(),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &Scalar) -> Scalar {
        self.check(rhs);
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: ((*a as u64 * *b as u64) % *modulus as u64) as u32,
                modulus: *modulus,
            },
            _ => unreachable!(),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_in_lowest_terms() {
        let q = Field::Rational;
        let a = Scalar::Rat(BigRational::new(2.into(), 4.into()));
        let b = q.from_i64(-3);
        let s = &a * &b;
        let r = s.as_rational().unwrap();
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn prime_field_inverse() {
        let f = Field::prime(7).unwrap();
        for v in 1..7 {
            let a = f.from_i64(v);
            assert!((&a * &a.inv().unwrap()).is_one());
        }
        assert!(f.zero().inv().is_none());
    }

    #[test]
    fn rejects_composites_and_large_moduli() {
        assert_eq!(Field::prime(9), Err(Error::BadPrime(9)));
        assert!(Field::prime(MAX_PRIME + 11).is_err());
        assert_eq!(Field::prime(2147483647).unwrap(), Field::Prime(2147483647));
    }

    #[test]
    fn reduction_of_rationals() {
        let h = Scalar::Rat(BigRational::new(1.into(), 2.into()));
        assert_eq!(h.reduce_mod(5).unwrap().residue(), Some(3));
        assert!(h.reduce_mod(2).is_none());
    }

    #[test]
    fn squares() {
        let f = Field::prime(3).unwrap();
        assert!(f.from_i64(1).is_square());
        assert!(!f.from_i64(2).is_square());
        let q = Field::Rational;
        assert!(Scalar::Rat(BigRational::new(9.into(), 4.into())).is_square());
        assert!(!q.from_i64(2).is_square());
        assert!(!q.from_i64(-1).is_square());
    }

    #[test]
    fn field_parsing() {
        assert_eq!("Q".parse::<Field>().unwrap(), Field::Rational);
        assert_eq!("Fp:5".parse::<Field>().unwrap(), Field::Prime(5));
        assert!("Fp:6".parse::<Field>().is_err());
    }
}
