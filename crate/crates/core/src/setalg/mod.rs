//! Finite subsets of a ring and the basic set algebra on them: sumsets,
//! product sets, dilates, their iterates, and difference sets.
//!
//! Over `F_p` with `p <= 2^20` a set is a dense bitset of length `p`, so a
//! sumset is one cyclic shift-or per element of the smaller operand. Larger
//! fields and the integers use a sorted, duplicate-free vector.

mod bits;
mod trace;

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::ring::{mul_mod, Elem, Ring};

pub(crate) use bits::BitSet;
pub use trace::{traced_iter_productset, traced_iter_sumset, TraceOp, TraceSet};

/// Largest modulus stored as a dense bitset.
pub const DENSE_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Dense(BitSet),
    Sorted(Vec<Elem>),
}

/// A finite set of canonical ring elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElemSet {
    ring: Ring,
    repr: Repr,
}

fn dense_len(ring: &Ring) -> Option<usize> {
    ring.modulus().filter(|&p| p <= DENSE_LIMIT).map(|p| p as usize)
}

impl ElemSet {
    pub fn empty(ring: Ring) -> Self {
        let repr = match dense_len(&ring) {
            Some(p) => Repr::Dense(BitSet::new(p)),
            None => Repr::Sorted(Vec::new()),
        };
        ElemSet { ring, repr }
    }

    /// Builds a set from arbitrary integers, reducing each into the ring.
    pub fn from_elems<I: IntoIterator<Item = Elem>>(ring: Ring, elems: I) -> Self {
        match dense_len(&ring) {
            Some(p) => {
                let mut bits = BitSet::new(p);
                for x in elems {
                    bits.insert(ring.reduce(&x).to_usize().unwrap());
                }
                ElemSet { ring, repr: Repr::Dense(bits) }
            }
            None => {
                let mut v: Vec<Elem> = elems.into_iter().map(|x| ring.reduce(&x)).collect();
                v.sort();
                v.dedup();
                ElemSet { ring, repr: Repr::Sorted(v) }
            }
        }
    }

    pub fn from_i64s(ring: Ring, elems: &[i64]) -> Self {
        Self::from_elems(ring, elems.iter().map(|&x| BigInt::from(x)))
    }

    /// All of `F_p`. Fails over the integers.
    pub fn full_field(ring: Ring) -> Result<Self> {
        let p = ring
            .modulus()
            .ok_or_else(|| Error::InvalidArgument("the integers are not finite".into()))?;
        Ok(match dense_len(&ring) {
            Some(p) => ElemSet { ring, repr: Repr::Dense(BitSet::full(p)) },
            None => Self::from_elems(ring, (0..p).map(BigInt::from)),
        })
    }

    /// Parses a comma-separated integer literal such as `"0,1,3"`. Values
    /// are reduced into the ring; the flag reports whether reduction merged
    /// distinct literals.
    pub fn parse(ring: Ring, literal: &str) -> Result<(Self, bool)> {
        let mut raw = Vec::new();
        for tok in literal.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let x: BigInt = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad set element {tok:?}")))?;
            raw.push(x);
        }
        let mut distinct = raw.clone();
        distinct.sort();
        distinct.dedup();
        let set = Self::from_elems(ring, raw);
        let collapsed = set.len() < distinct.len();
        Ok((set, collapsed))
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Dense(b) => b.count(),
            Repr::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.repr {
            Repr::Dense(b) => b.is_empty(),
            Repr::Sorted(v) => v.is_empty(),
        }
    }

    pub fn contains(&self, x: &Elem) -> bool {
        let x = self.ring.reduce(x);
        match &self.repr {
            Repr::Dense(b) => b.contains(x.to_usize().unwrap()),
            Repr::Sorted(v) => v.binary_search(&x).is_ok(),
        }
    }

    /// Elements in ascending canonical order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Elem> + '_> {
        match &self.repr {
            Repr::Dense(b) => Box::new(b.iter().map(BigInt::from)),
            Repr::Sorted(v) => Box::new(v.iter().cloned()),
        }
    }

    pub fn to_vec(&self) -> Vec<Elem> {
        self.iter().collect()
    }

    pub fn is_full_field(&self) -> bool {
        match (&self.repr, self.ring.modulus()) {
            (Repr::Dense(b), _) => b.is_full(),
            (Repr::Sorted(v), Some(p)) => v.len() as u64 == p,
            (Repr::Sorted(_), None) => false,
        }
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        if self.ring != other.ring {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => a.is_subset(b),
            _ => self.iter().all(|x| other.contains(&x)),
        }
    }

    pub fn union(&self, other: &ElemSet) -> Result<ElemSet> {
        same_ring(self, other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => {
                let mut bits = a.clone();
                bits.union_with(b);
                ElemSet { ring: self.ring, repr: Repr::Dense(bits) }
            }
            _ => Self::from_elems(self.ring, self.iter().chain(other.iter())),
        })
    }

    pub(crate) fn bits(&self) -> Option<&BitSet> {
        match &self.repr {
            Repr::Dense(b) => Some(b),
            Repr::Sorted(_) => None,
        }
    }

    pub(crate) fn from_bits(ring: Ring, bits: BitSet) -> Self {
        debug_assert_eq!(dense_len(&ring), Some(bits.len()));
        ElemSet { ring, repr: Repr::Dense(bits) }
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

fn same_ring(a: &ElemSet, b: &ElemSet) -> Result<()> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch);
    }
    Ok(())
}

fn positive(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("iteration count must be positive".into()));
    }
    Ok(())
}

/// `A + B`.
pub fn sumset(a: &ElemSet, b: &ElemSet) -> Result<ElemSet> {
    same_ring(a, b)?;
    let ring = a.ring;
    if let (Some(x), Some(y)) = (a.bits(), b.bits()) {
        // Rotate the larger operand once per element of the smaller one.
        let (small, large) = if x.count() <= y.count() { (x, y) } else { (y, x) };
        let mut out = BitSet::new(x.len());
        for s in small.iter() {
            out.or_rotated(large, s);
            if out.is_full() {
                break;
            }
        }
        return Ok(ElemSet::from_bits(ring, out));
    }
    Ok(pairwise(a, b, |x, y| ring.add(x, y)))
}

/// `AB`.
pub fn productset(a: &ElemSet, b: &ElemSet) -> Result<ElemSet> {
    same_ring(a, b)?;
    let ring = a.ring;
    if let (Some(x), Some(y)) = (a.bits(), b.bits()) {
        let p = ring.modulus().unwrap();
        let mut out = BitSet::new(x.len());
        let ys: Vec<usize> = y.iter().collect();
        for s in x.iter() {
            for &t in &ys {
                out.insert(mul_mod(s as u64, t as u64, p) as usize);
            }
        }
        return Ok(ElemSet::from_bits(ring, out));
    }
    Ok(pairwise(a, b, |x, y| ring.mul(x, y)))
}

fn pairwise(a: &ElemSet, b: &ElemSet, op: impl Fn(&Elem, &Elem) -> Elem) -> ElemSet {
    let bs = b.to_vec();
    let mut out = Vec::with_capacity(a.len() * bs.len());
    for x in a.iter() {
        for y in &bs {
            out.push(op(&x, y));
        }
    }
    ElemSet::from_elems(a.ring, out)
}

/// `a0 * A`.
pub fn dilate(a0: &Elem, a: &ElemSet) -> ElemSet {
    let ring = a.ring;
    let a0 = ring.reduce(a0);
    ElemSet::from_elems(ring, a.iter().map(|x| ring.mul(&a0, &x)))
}

/// `m`-fold sumset `mA`, computed by doubling.
pub fn iter_sumset(m: usize, a: &ElemSet) -> Result<ElemSet> {
    positive(m)?;
    iterate(m, a, sumset, |s| s.is_full_field())
}

/// `m`-fold product set `A^m`, computed by doubling.
pub fn iter_productset(m: usize, a: &ElemSet) -> Result<ElemSet> {
    positive(m)?;
    iterate(m, a, productset, |_| false)
}

fn iterate(
    m: usize,
    a: &ElemSet,
    op: fn(&ElemSet, &ElemSet) -> Result<ElemSet>,
    saturated: fn(&ElemSet) -> bool,
) -> Result<ElemSet> {
    // hA (op) kA = (h+k)A, so binary expansion of m is valid.
    let mut acc: Option<ElemSet> = None;
    let mut base = a.clone();
    let mut k = m;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(s) => op(&s, &base)?,
            });
            if acc.as_ref().is_some_and(saturated) {
                return Ok(acc.unwrap());
            }
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = op(&base, &base)?;
    }
    Ok(acc.expect("m >= 1"))
}

/// `-A`.
pub fn negate(a: &ElemSet) -> ElemSet {
    let ring = a.ring;
    ElemSet::from_elems(ring, a.iter().map(|x| ring.neg(&x)))
}

/// `A - A`.
pub fn difference_set(a: &ElemSet) -> ElemSet {
    sumset(a, &negate(a)).expect("same ring")
}

/// Symmetric normalization `A' = a0^{-1} * (A - A)` with `a0` the least
/// nonzero element of `A - A`. Returns `(A', a0)`.
pub fn normalize_symmetric(a: &ElemSet) -> Result<(ElemSet, Elem)> {
    if a.len() < 2 {
        return Err(Error::SetTooSmall(a.len()));
    }
    let ring = a.ring;
    if !ring.is_field() {
        return Err(Error::InvalidArgument("normalization needs a prime field".into()));
    }
    let diff = difference_set(a);
    let a0 = ring
        .least_nonzero(diff.to_vec().iter())
        .expect("|A| >= 2 gives a nonzero difference");
    let normalized = dilate(&ring.inv(&a0)?, &diff);

    if normalized != negate(&normalized) {
        return Err(Error::Verification("normalized set is not symmetric".into()));
    }
    if !normalized.contains(&ring.zero()) || !normalized.contains(&ring.one()) {
        return Err(Error::Verification("normalized set misses 0 or 1".into()));
    }
    if normalized.len() < a.len() {
        return Err(Error::Verification("normalized set shrank".into()));
    }
    Ok((normalized, a0))
}
