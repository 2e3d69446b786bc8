//! Exact coefficient fields.
//!
//! Every algorithm in the crate is generic over a [`Scalar`]: an exact field
//! element built on the `num-traits` arithmetic vocabulary. Two instances are
//! provided, arbitrary-precision rationals and prime-field residues.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Runtime description of a coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientField {
    Rationals,
    Prime(u64),
}

impl CoefficientField {
    pub fn characteristic(&self) -> u64 {
        match self {
            CoefficientField::Rationals => 0,
            CoefficientField::Prime(p) => *p,
        }
    }

    /// Builds `F_p`, refusing composite or oversized moduli.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if p < 2 || p >= (1 << 31) || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(CoefficientField::Prime(p))
    }
}

impl fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Rationals => write!(f, "Q"),
            CoefficientField::Prime(p) => write!(f, "Fp {p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a supported prime modulus (need a prime below 2^31)")]
    NotPrime(u64),
    #[error("denominator vanishes in characteristic {0}")]
    ZeroDenominator(u64),
    #[error("scalar type does not implement field {0}")]
    Mismatch(CoefficientField),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An exact field element.
///
/// Constants must be created through [`Scalar::from_i64`] / [`Scalar::from_ratio`]
/// with the ring's [`CoefficientField`]; `Zero::zero()` and `One::one()` are
/// field-neutral and adopt the field of the first operand they meet.
pub trait Scalar:
    Clone
    + PartialEq
    + Eq
    + Hash
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether this scalar type realizes `field`.
    fn supports(field: &CoefficientField) -> bool;

    fn from_ratio(field: &CoefficientField, num: &BigInt, den: &BigInt) -> Result<Self, FieldError>;

    fn from_i64(field: &CoefficientField, n: i64) -> Self {
        Self::from_ratio(field, &BigInt::from(n), &BigInt::one()).expect("unit denominator")
    }

    /// Multiplicative inverse. Panics on zero.
    fn inv(&self) -> Self;

    /// Factor that makes a coefficient list canonical: integral primitive with
    /// positive first entry over Q, monic over F_p.
    fn normalizer<'a>(coeffs: impl Iterator<Item = &'a Self>) -> Self
    where
        Self: 'a;

    /// Whether the value prints as `±1` (used to elide unit coefficients).
    fn is_one_abs(&self) -> bool;

    fn is_negative(&self) -> bool;

    /// Text form of `|self|`, parseable by the polynomial grammar.
    fn abs_text(&self) -> String;
}

/// Arbitrary-precision rationals.
pub type Rational = BigRational;

impl Scalar for BigRational {
    fn supports(field: &CoefficientField) -> bool {
        matches!(field, CoefficientField::Rationals)
    }

    fn from_ratio(_field: &CoefficientField, num: &BigInt, den: &BigInt) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::ZeroDenominator(0));
        }
        Ok(BigRational::new(num.clone(), den.clone()))
    }

    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        self.recip()
    }

    fn normalizer<'a>(coeffs: impl Iterator<Item = &'a Self>) -> Self {
        let mut lcm_den = BigInt::one();
        let mut gcd_num = BigInt::zero();
        let mut first_sign = None;
        for c in coeffs {
            if first_sign.is_none() {
                first_sign = Some(Signed::is_negative(c));
            }
            lcm_den = lcm_den.lcm(c.denom());
            gcd_num = gcd_num.gcd(c.numer());
        }
        if gcd_num.is_zero() {
            return BigRational::one();
        }
        let s = BigRational::new(lcm_den, gcd_num);
        if first_sign == Some(true) {
            -s
        } else {
            s
        }
    }

    fn is_one_abs(&self) -> bool {
        self.abs().is_one()
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn abs_text(&self) -> String {
        let a = self.abs();
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

/// Residue in `F_p` carrying its modulus; modulus 0 marks a field-neutral
/// constant produced by `Zero`/`One`.
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn new(value: i64, modulus: u64) -> Self {
        let v = value.rem_euclid(modulus as i64) as u64;
        Fp { value: v, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn join(a: &Fp, b: &Fp) -> u64 {
        match (a.modulus, b.modulus) {
            (0, m) | (m, 0) => m,
            (m, n) => {
                assert_eq!(m, n, "mixing residues of different prime fields");
                m
            }
        }
    }

    fn reduce(v: u128, m: u64) -> u64 {
        if m == 0 {
            v as u64
        } else {
            (v % m as u128) as u64
        }
    }

    fn pow(self, mut e: u64) -> Fp {
        let m = self.modulus;
        let mut base = self.value as u128;
        let mut acc: u128 = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m as u128;
            }
            base = base * base % m as u128;
            e >>= 1;
        }
        Fp { value: acc as u64, modulus: m }
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for Fp {}

impl Hash for Fp {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.value.hash(state)
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp { value: 0, modulus: 0 }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp { value: 1, modulus: 0 }
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let m = Fp::join(&self, &rhs);
        Fp { value: Fp::reduce(self.value as u128 + rhs.value as u128, m), modulus: m }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        self + (-rhs)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.value == 0 {
            return self;
        }
        assert!(self.modulus != 0, "negating a field-neutral residue");
        Fp { value: self.modulus - self.value, modulus: self.modulus }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let m = Fp::join(&self, &rhs);
        Fp { value: Fp::reduce(self.value as u128 * rhs.value as u128, m), modulus: m }
    }
}

impl Div for Fp {
    type Output = Fp;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Fp) -> Fp {
        self * rhs.inv()
    }
}

impl Scalar for Fp {
    fn supports(field: &CoefficientField) -> bool {
        matches!(field, CoefficientField::Prime(_))
    }

    fn from_ratio(field: &CoefficientField, num: &BigInt, den: &BigInt) -> Result<Self, FieldError> {
        let p = match field {
            CoefficientField::Prime(p) => *p,
            other => return Err(FieldError::Mismatch(*other)),
        };
        let pb = BigInt::from(p);
        let n = num.mod_floor(&pb).to_u64().expect("residue fits");
        let d = den.mod_floor(&pb).to_u64().expect("residue fits");
        if d == 0 {
            return Err(FieldError::ZeroDenominator(p));
        }
        Ok(Fp { value: n, modulus: p } / Fp { value: d, modulus: p })
    }

    fn inv(&self) -> Self {
        assert!(self.value != 0, "inverse of zero");
        if self.modulus == 0 {
            assert_eq!(self.value, 1, "inverting a field-neutral residue");
            return *self;
        }
        self.pow(self.modulus - 2)
    }

    fn normalizer<'a>(mut coeffs: impl Iterator<Item = &'a Self>) -> Self {
        match coeffs.next() {
            Some(c) if !c.is_zero() => c.inv(),
            _ => Fp::one(),
        }
    }

    fn is_one_abs(&self) -> bool {
        self.value == 1
    }

    fn is_negative(&self) -> bool {
        false
    }

    fn abs_text(&self) -> String {
        self.value.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = CoefficientField::prime(7).unwrap();
        let three = Fp::from_i64(&f, 3);
        let five = Fp::from_i64(&f, 5);
        assert_eq!((three * five).value(), 1);
        assert_eq!((three / five * five), three);
        assert_eq!((Fp::one() + Fp::from_i64(&f, 6)).value(), 0);
        assert_eq!(Fp::from_ratio(&f, &BigInt::from(1), &BigInt::from(2)).unwrap().value(), 4);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(CoefficientField::prime(9).is_err());
        assert!(CoefficientField::prime(2).is_ok());
    }

    #[test]
    fn zero_denominator_mod_p() {
        let f = CoefficientField::prime(3).unwrap();
        assert_eq!(
            Fp::from_ratio(&f, &BigInt::from(1), &BigInt::from(6)),
            Err(FieldError::ZeroDenominator(3))
        );
    }

    #[test]
    fn rational_normalizer_is_primitive() {
        let q = CoefficientField::Rationals;
        let cs = [
            Rational::from_ratio(&q, &BigInt::from(-2), &BigInt::from(3)).unwrap(),
            Rational::from_i64(&q, 4),
        ];
        let s = Rational::normalizer(cs.iter());
        assert_eq!(cs[0].clone() * s.clone(), Rational::from_i64(&q, 1));
        assert_eq!(cs[1].clone() * s, Rational::from_i64(&q, -6));
    }
}
