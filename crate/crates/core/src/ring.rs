//! Exact arithmetic in a prime field `F_p` or in the integers.
//!
//! Elements are carried as [`BigInt`] everywhere in the public API. Over
//! `F_p` every element is the least non-negative residue, so structural
//! equality of elements is equality in the ring. Hot loops (elimination,
//! enumeration, bitset kernels) drop to `u64`/`i128` internally.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Elem = BigInt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingKind {
    PrimeField,
    Integers,
}

/// The ambient ring. Immutable once built; the modulus is prime by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    modulus: Option<u64>,
}

impl Ring {
    pub fn new(kind: RingKind, p: Option<u64>) -> Result<Self> {
        match kind {
            RingKind::PrimeField => Self::prime_field(p.ok_or(Error::MissingModulus)?),
            RingKind::Integers => Ok(Self::integers()),
        }
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        Ok(Ring { modulus: Some(p) })
    }

    pub const fn integers() -> Self {
        Ring { modulus: None }
    }

    pub fn kind(&self) -> RingKind {
        match self.modulus {
            Some(_) => RingKind::PrimeField,
            None => RingKind::Integers,
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    pub fn is_field(&self) -> bool {
        self.modulus.is_some()
    }

    pub fn zero(&self) -> Elem {
        BigInt::zero()
    }

    pub fn one(&self) -> Elem {
        self.reduce(&BigInt::one())
    }

    /// Canonical representative of `x`.
    pub fn reduce(&self, x: &BigInt) -> Elem {
        match self.modulus {
            Some(p) => x.mod_floor(&BigInt::from(p)),
            None => x.clone(),
        }
    }

    pub fn from_i64(&self, x: i64) -> Elem {
        match self.modulus {
            Some(p) => BigInt::from((x as i128).rem_euclid(p as i128)),
            None => BigInt::from(x),
        }
    }

    pub fn is_canonical(&self, x: &BigInt) -> bool {
        match self.modulus {
            Some(p) => !x.is_negative() && *x < BigInt::from(p),
            None => true,
        }
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Elem {
        self.reduce(&(x + y))
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Elem {
        self.reduce(&(x - y))
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        self.reduce(&(x * y))
    }

    pub fn neg(&self, x: &Elem) -> Elem {
        self.reduce(&-x)
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem> {
        let x = self.reduce(x);
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self.modulus {
            Some(p) => {
                let r = x.to_u64().expect("canonical residue fits u64");
                Ok(BigInt::from(inv_mod_u64(r, p)))
            }
            None if x.abs().is_one() => Ok(x),
            None => Err(Error::NoInverseInIntegerRing(x)),
        }
    }

    pub fn pow(&self, x: &Elem, e: u64) -> Elem {
        match self.modulus {
            Some(p) => x.modpow(&BigInt::from(e), &BigInt::from(p)),
            None => num_traits::pow::pow(x.clone(), e as usize),
        }
    }

    /// `(-1)^e` as a ring element.
    pub fn sign(&self, e: u64) -> Elem {
        if e.is_multiple_of(2) {
            self.one()
        } else {
            self.neg(&self.one())
        }
    }

    /// `t / c` when it exists in the ring: any nonzero `c` over `F_p`,
    /// only exact quotients over the integers.
    pub fn div_exact(&self, t: &Elem, c: &Elem) -> Option<Elem> {
        if c.is_zero() {
            return None;
        }
        match self.modulus {
            Some(_) => Some(self.mul(t, &self.inv(c).ok()?)),
            None => {
                let (q, r) = t.div_rem(c);
                r.is_zero().then_some(q)
            }
        }
    }

    /// The least nonzero element of `elems` in canonical order. Over the
    /// integers only positive candidates are considered.
    pub(crate) fn least_nonzero<'a>(&self, elems: impl IntoIterator<Item = &'a Elem>) -> Option<Elem> {
        elems
            .into_iter()
            .filter(|x| !x.is_zero() && (self.is_field() || x.is_positive()))
            .min()
            .cloned()
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus {
            Some(p) => write!(f, "F_{p}"),
            None => write!(f, "Z"),
        }
    }
}

/// Trial division primality check.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) || p.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) || p.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

/// Inverse of a nonzero residue via the extended Euclidean algorithm.
pub(crate) fn inv_mod_u64(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "{a} not invertible mod {p}");
    t0.rem_euclid(p as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn make_ring_examples() {
        assert_eq!(Ring::prime_field(7).unwrap().modulus(), Some(7));
        assert_eq!(Ring::prime_field(9), Err(Error::CompositeModulus(9)));
        assert_eq!(Ring::prime_field(1), Err(Error::CompositeModulus(1)));
        assert_eq!(Ring::new(RingKind::Integers, None).unwrap().kind(), RingKind::Integers);
        assert_eq!(Ring::new(RingKind::PrimeField, None), Err(Error::MissingModulus));
    }

    #[test]
    fn small_primes() {
        let primes: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime(1_000_003));
        assert!(!is_prime(1_000_001));
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = Ring::prime_field(5).unwrap();
        assert_eq!(f5.add(&b(3), &b(4)), b(2));
        assert_eq!(f5.inv(&b(2)).unwrap(), b(3));
        for r in [f5, Ring::integers()] {
            assert_eq!(r.neg(&b(0)), b(0));
        }
        assert_eq!(f5.inv(&b(0)), Err(Error::DivisionByZero));
        assert_eq!(
            Ring::integers().inv(&b(2)),
            Err(Error::NoInverseInIntegerRing(b(2)))
        );
        assert_eq!(Ring::integers().inv(&b(-1)).unwrap(), b(-1));
        assert_eq!(f5.from_i64(-1), b(4));
    }

    #[test]
    fn inverse_roundtrip_exhaustive() {
        for p in [2u64, 3, 5, 7, 101, 65_537] {
            let r = Ring::prime_field(p).unwrap();
            let step = (p / 200).max(1);
            for x in (1..p).step_by(step as usize) {
                let x = b(x as i64);
                assert_eq!(r.mul(&x, &r.inv(&x).unwrap()), r.one());
            }
        }
    }

    #[test]
    fn integer_ops_match_i128_reference() {
        let z = Ring::integers();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let x: i64 = rng.gen();
            let y: i64 = rng.gen();
            let (bx, by) = (b(x), b(y));
            assert_eq!(z.add(&bx, &by), BigInt::from(x as i128 + y as i128));
            assert_eq!(z.sub(&bx, &by), BigInt::from(x as i128 - y as i128));
            assert_eq!(z.mul(&bx, &by), BigInt::from(x as i128 * y as i128));
            assert_eq!(z.neg(&bx), BigInt::from(-(x as i128)));
        }
    }

    #[test]
    fn div_exact_behaviour() {
        let z = Ring::integers();
        assert_eq!(z.div_exact(&b(12), &b(-4)), Some(b(-3)));
        assert_eq!(z.div_exact(&b(7), &b(2)), None);
        let f7 = Ring::prime_field(7).unwrap();
        assert_eq!(f7.div_exact(&b(1), &b(3)), Some(b(5)));
        assert_eq!(f7.div_exact(&b(1), &b(0)), None);
    }
}
