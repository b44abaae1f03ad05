//! Exact scalar arithmetic and integer / local-ring linear algebra.
//!
//! The three coefficient rings are `Z`, `Z_(p)` (rationals with denominator
//! coprime to `p`) and `F_p`. All of them are Euclidean enough for Smith
//! normal forms, and every degreewise homology computation in the rest of
//! the crate bottoms out here.

mod matrix;
mod shape;
mod snf;

pub use matrix::Matrix;
pub use shape::FgAbelianShape;
pub use snf::{
    cokernel_shape, elementary_divisors, homology_named, homology_shape, kernel_basis,
    kernel_matrix, rank, smith_normal_form, solve, HomologyClass, SnfResult,
};

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;
pub type Int = BigInt;

/// Construct a `BigRational` from an `i64`.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// Construct a `BigRational` from a numerator/denominator pair.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BaseError {
    #[error("matrix entries disagree on the base ring: {0} vs {1}")]
    MixedRings(BaseRing, BaseRing),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("value {0} is not an element of {1}")]
    NotInRing(String, BaseRing),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("linear system has no solution over {0}")]
    NoSolution(BaseRing),
}

/// One of the three coefficient rings everything reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum BaseRing {
    /// The integers.
    Integers,
    /// Integers localized at the prime `p`: denominators coprime to `p`.
    PLocal(u64),
    /// The prime field `F_p`.
    PrimeField(u64),
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseRing::Integers => write!(f, "Z"),
            BaseRing::PLocal(p) => write!(f, "Z({p})"),
            BaseRing::PrimeField(p) => write!(f, "F({p})"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl BaseRing {
    pub fn integers() -> Self {
        BaseRing::Integers
    }

    pub fn p_local(p: u64) -> Result<Self, BaseError> {
        if is_prime(p) {
            Ok(BaseRing::PLocal(p))
        } else {
            Err(BaseError::NotPrime(p))
        }
    }

    pub fn prime_field(p: u64) -> Result<Self, BaseError> {
        if is_prime(p) {
            Ok(BaseRing::PrimeField(p))
        } else {
            Err(BaseError::NotPrime(p))
        }
    }

    pub fn char_prime(&self) -> Option<u64> {
        match self {
            BaseRing::PrimeField(p) => Some(*p),
            _ => None,
        }
    }

    /// The localized prime, if any.
    pub fn local_prime(&self) -> Option<u64> {
        match self {
            BaseRing::PLocal(p) | BaseRing::PrimeField(p) => Some(*p),
            BaseRing::Integers => None,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, BaseRing::PrimeField(_))
    }

    /// Does `value` denote an element of this ring?
    pub fn contains(&self, value: &Rat) -> bool {
        match self {
            BaseRing::Integers | BaseRing::PrimeField(_) => value.is_integer(),
            BaseRing::PLocal(p) => !value.denom().is_multiple_of(&Int::from(*p)),
        }
    }

    /// Canonical representative: reduces mod `p` for prime fields.
    pub fn normalize(&self, value: Rat) -> Rat {
        match self {
            BaseRing::PrimeField(p) => {
                let r = value.numer().mod_floor(&Int::from(*p));
                Rat::from_integer(r)
            }
            _ => value,
        }
    }

    pub fn is_unit(&self, value: &Rat) -> bool {
        if value.is_zero() {
            return false;
        }
        match self {
            BaseRing::Integers => value.numer().abs().is_one(),
            BaseRing::PLocal(p) => !value.numer().is_multiple_of(&Int::from(*p)),
            BaseRing::PrimeField(_) => !self.normalize(value.clone()).is_zero(),
        }
    }

    /// `p`-adic valuation of a nonzero element (only for `PLocal`).
    fn valuation(&self, value: &Rat) -> u32 {
        let p = match self {
            BaseRing::PLocal(p) => Int::from(*p),
            _ => unreachable!("valuation only applies to PLocal"),
        };
        let mut v: i64 = 0;
        let mut n = value.numer().clone();
        while n.is_multiple_of(&p) && !n.is_zero() {
            n /= &p;
            v += 1;
        }
        let mut d = value.denom().clone();
        while d.is_multiple_of(&p) {
            d /= &p;
            v -= 1;
        }
        u32::try_from(v).expect("negative valuation outside the local ring")
    }

    /// A size measure driving pivot choice: smaller divides more.
    fn measure(&self, value: &Rat) -> Int {
        match self {
            BaseRing::Integers => value.numer().abs(),
            BaseRing::PLocal(_) => Int::from(self.valuation(value)),
            BaseRing::PrimeField(_) => Int::one(),
        }
    }

    /// Splits `value = unit * associate` with the canonical associate:
    /// `|n|` over `Z`, `p^v` over `Z_(p)`, `1` over `F_p`.
    pub(crate) fn canonical_associate(&self, value: &Rat) -> Rat {
        assert!(!value.is_zero());
        match self {
            BaseRing::Integers => Rat::from_integer(value.numer().abs()),
            BaseRing::PLocal(p) => {
                let v = self.valuation(value);
                Rat::from_integer(Int::from(*p).pow(v))
            }
            BaseRing::PrimeField(_) => Rat::one(),
        }
    }

    /// Exact division within the ring, `None` if the quotient leaves it.
    pub fn div_exact(&self, a: &Rat, b: &Rat) -> Option<Rat> {
        if b.is_zero() {
            return None;
        }
        if a.is_zero() {
            return Some(Rat::zero());
        }
        match self {
            BaseRing::PrimeField(p) => {
                let q = self.normalize(b.clone());
                if q.is_zero() {
                    return None;
                }
                let inv = mod_inverse(q.numer(), &Int::from(*p))?;
                Some(self.normalize(a * Rat::from_integer(inv)))
            }
            _ => {
                let q = a / b;
                if self.contains(&q) {
                    Some(q)
                } else {
                    None
                }
            }
        }
    }

    /// Does `a` divide `b` inside the ring?
    pub fn divides(&self, a: &Rat, b: &Rat) -> bool {
        if b.is_zero() {
            return true;
        }
        self.div_exact(b, a).is_some()
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self, a: &Rat) -> Rat {
        assert!(self.is_unit(a), "inverse of a non-unit in {self}");
        match self {
            BaseRing::PrimeField(p) => {
                let a = self.normalize(a.clone());
                Rat::from_integer(mod_inverse(a.numer(), &Int::from(*p)).unwrap())
            }
            _ => a.recip(),
        }
    }

    pub fn add(&self, a: &Rat, b: &Rat) -> Rat {
        self.normalize(a + b)
    }

    pub fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        self.normalize(a * b)
    }
}

fn mod_inverse(a: &Int, p: &Int) -> Option<Int> {
    // extended Euclid
    let (mut t, mut new_t) = (Int::zero(), Int::one());
    let (mut r, mut new_r) = (p.clone(), a.mod_floor(p));
    while !new_r.is_zero() {
        let q = &r / &new_r;
        let tmp_t = &t - &q * &new_t;
        t = std::mem::replace(&mut new_t, tmp_t);
        let tmp_r = &r - &q * &new_r;
        r = std::mem::replace(&mut new_r, tmp_r);
    }
    if !r.is_one() {
        return None;
    }
    Some(t.mod_floor(p))
}

/// A ring-tagged exact scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar {
    pub ring: BaseRing,
    pub value: Rat,
}

impl Scalar {
    pub fn new(ring: BaseRing, value: Rat) -> Result<Self, BaseError> {
        if !ring.contains(&value) {
            return Err(BaseError::NotInRing(value.to_string(), ring));
        }
        Ok(Scalar {
            ring,
            value: ring.normalize(value),
        })
    }

    pub fn from_i64(ring: BaseRing, n: i64) -> Self {
        Scalar {
            ring,
            value: ring.normalize(rat(n)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_constructors_check_primality() {
        assert!(BaseRing::p_local(3).is_ok());
        assert_eq!(BaseRing::p_local(4), Err(BaseError::NotPrime(4)));
        assert_eq!(BaseRing::prime_field(1), Err(BaseError::NotPrime(1)));
    }

    #[test]
    fn p_local_membership() {
        let r = BaseRing::p_local(3).unwrap();
        assert!(r.contains(&ratio(1, 2)));
        assert!(!r.contains(&ratio(1, 3)));
        assert!(r.is_unit(&ratio(2, 5)));
        assert!(!r.is_unit(&rat(3)));
    }

    #[test]
    fn prime_field_normalization() {
        let f = BaseRing::prime_field(5).unwrap();
        assert_eq!(f.normalize(rat(-1)), rat(4));
        assert_eq!(f.div_exact(&rat(1), &rat(2)), Some(rat(3)));
    }

    #[test]
    fn canonical_associates() {
        let z = BaseRing::Integers;
        assert_eq!(z.canonical_associate(&rat(-6)), rat(6));
        let zp = BaseRing::p_local(3).unwrap();
        assert_eq!(zp.canonical_associate(&rat(18)), rat(9));
        assert_eq!(zp.canonical_associate(&ratio(2, 5)), rat(1));
    }

    #[test]
    fn scalar_rejects_foreign_values() {
        let z = BaseRing::Integers;
        assert!(Scalar::new(z, ratio(1, 2)).is_err());
        let z3 = BaseRing::p_local(3).unwrap();
        assert!(Scalar::new(z3, ratio(1, 6)).is_err());
        assert!(Scalar::new(z3, ratio(1, 2)).is_ok());
    }
}
