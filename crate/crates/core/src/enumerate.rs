//! Ground truth for `D_n(A)`.
//!
//! [`dset_naive`] enumerates all `|A|^(n^2)` matrices. [`dset_cofactor`]
//! enumerates only the top `(n-1) x n` rows: with last-row cofactors
//! `c_1..c_n`, the completions contribute exactly `c_1*A + ... + c_n*A`.
//! Both split the work over the value of the first entry and merge the
//! per-worker sets by union, so the result does not depend on thread count.
//!
//! Duplicate top submatrices are not quotiented by row permutations: that
//! flips determinant signs and is only sound when the result is symmetric.
//!
//! [`dset_lower_bound_constructive`] returns a certified subset of `D_k(A)`
//! from the gadget constructions, with no enumeration at all.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{build_gadget_scaled, gadget_sign, Assignment, DifferenceLift, GadgetWitness};
use crate::matrix::{det_bareiss_i128, det_mod_p, Matrix};
use crate::ring::{sub_mod, Elem, Ring};
use crate::setalg::{
    difference_set, dilate, iter_productset, iter_sumset, sumset, traced_iter_productset,
    traced_iter_sumset, BitSet, ElemSet, DENSE_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Cofactor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumBudget {
    max_matrices: u64,
    max_seconds: f64,
    method: Method,
}

impl EnumBudget {
    pub fn new(max_matrices: u64, max_seconds: f64, method: Method) -> Result<Self> {
        if max_matrices == 0 || max_seconds.is_nan() || max_seconds <= 0.0 {
            return Err(Error::InvalidArgument("budgets must be positive".into()));
        }
        Ok(EnumBudget { max_matrices, max_seconds, method })
    }

    pub fn max_matrices(&self) -> u64 {
        self.max_matrices
    }

    pub fn max_seconds(&self) -> f64 {
        self.max_seconds
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn with_method(self, method: Method) -> Self {
        EnumBudget { method, ..self }
    }
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget { max_matrices: 100_000_000, max_seconds: 300.0, method: Method::Cofactor }
    }
}

/// `D_n(A)` by the budget's method.
pub fn dset(a: &ElemSet, n: usize, budget: &EnumBudget) -> Result<ElemSet> {
    match budget.method {
        Method::Naive => dset_naive(a, n, budget),
        Method::Cofactor => dset_cofactor(a, n, budget),
    }
}

fn check_inputs(a: &ElemSet, n: usize) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Degenerate("empty entry set".into()));
    }
    if n == 0 {
        return Err(Error::Degenerate("matrix size 0".into()));
    }
    Ok(())
}

fn check_count(base: usize, exp: usize, budget: &EnumBudget) -> Result<u64> {
    let count = u32::try_from(exp).ok().and_then(|e| (base as u64).checked_pow(e));
    match count {
        Some(c) if c <= budget.max_matrices => Ok(c),
        _ => Err(Error::BudgetExceeded(format!(
            "{base}^{exp} matrices exceed the limit of {}",
            budget.max_matrices
        ))),
    }
}

/// Entry values in the fastest form the ring allows.
#[derive(Clone)]
enum Values {
    Mod(u64, Vec<u64>),
    Int(Vec<i128>),
    Big(Vec<BigInt>),
}

impl Values {
    fn of(a: &ElemSet) -> Self {
        let elems = a.to_vec();
        if let Some(p) = a.ring().modulus() {
            return Values::Mod(p, elems.iter().map(|x| x.to_u64().unwrap()).collect());
        }
        // Small enough that Bareiss rarely overflows i128.
        match elems.iter().map(|x| x.to_i64().filter(|v| v.unsigned_abs() < 1 << 40)).collect::<Option<Vec<_>>>() {
            Some(v) => Values::Int(v.into_iter().map(i128::from).collect()),
            None => Values::Big(elems),
        }
    }

    fn len(&self) -> usize {
        match self {
            Values::Mod(_, v) => v.len(),
            Values::Int(v) => v.len(),
            Values::Big(v) => v.len(),
        }
    }
}

/// Per-worker result set.
enum Acc {
    Dense(BitSet),
    Sparse(HashSet<BigInt>),
}

impl Acc {
    fn new(ring: Ring) -> Self {
        match ring.modulus() {
            Some(p) if p <= DENSE_LIMIT => Acc::Dense(BitSet::new(p as usize)),
            _ => Acc::Sparse(HashSet::new()),
        }
    }

    fn insert_u64(&mut self, x: u64) {
        match self {
            Acc::Dense(b) => b.insert(x as usize),
            Acc::Sparse(s) => {
                s.insert(BigInt::from(x));
            }
        }
    }

    fn insert(&mut self, x: BigInt) {
        match self {
            Acc::Dense(b) => b.insert(x.to_usize().unwrap()),
            Acc::Sparse(s) => {
                s.insert(x);
            }
        }
    }

    fn insert_set(&mut self, set: &ElemSet) {
        match (self, set.bits()) {
            (Acc::Dense(b), Some(bits)) => b.union_with(bits),
            (acc, _) => set.iter().for_each(|x| acc.insert(x)),
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        match (&mut self, other) {
            (Acc::Dense(a), Acc::Dense(b)) => a.union_with(&b),
            (Acc::Sparse(a), Acc::Sparse(b)) => a.extend(b),
            _ => unreachable!("accumulators share a ring"),
        }
        self
    }

    fn into_set(self, ring: Ring) -> ElemSet {
        match self {
            Acc::Dense(b) => ElemSet::from_bits(ring, b),
            Acc::Sparse(s) => ElemSet::from_elems(ring, s),
        }
    }
}

/// Deadline shared by all workers of one enumeration.
struct Clock {
    start: Instant,
    limit: Duration,
    expired: AtomicBool,
}

impl Clock {
    fn new(budget: &EnumBudget) -> Self {
        Clock {
            start: Instant::now(),
            limit: Duration::from_secs_f64(budget.max_seconds.min(1e9)),
            expired: AtomicBool::new(false),
        }
    }

    fn tick(&self) -> bool {
        if self.start.elapsed() > self.limit {
            self.expired.store(true, Ordering::Relaxed);
        }
        self.expired.load(Ordering::Relaxed)
    }

    fn check(&self, budget: &EnumBudget) -> Result<()> {
        if self.expired.load(Ordering::Relaxed) {
            return Err(Error::BudgetExceeded(format!("time limit of {}s", budget.max_seconds)));
        }
        Ok(())
    }
}

/// Walks every index vector of length `len` over `base` values whose first
/// coordinate is `first`, calling `f` on each. Stops early when `f` says so.
fn odometer(base: usize, len: usize, first: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let mut idx = vec![0usize; len];
    idx[0] = first;
    loop {
        if !f(&idx) {
            return;
        }
        let mut pos = len - 1;
        loop {
            if pos == 0 {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < base {
                break;
            }
            idx[pos] = 0;
            pos -= 1;
        }
    }
}

fn big_det(ring: Ring, vals: &[BigInt], idx: &[usize], n: usize) -> BigInt {
    let entries = idx.iter().map(|&i| vals[i].clone()).collect();
    Matrix::new(ring, n, n, entries).unwrap().det().unwrap()
}

/// `D_n(A)` by enumerating every matrix.
pub fn dset_naive(a: &ElemSet, n: usize, budget: &EnumBudget) -> Result<ElemSet> {
    check_inputs(a, n)?;
    check_count(a.len(), n * n, budget)?;
    let ring = a.ring();
    let vals = Values::of(a);
    let clock = Clock::new(budget);
    let len = n * n;
    let acc = (0..vals.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = Acc::new(ring);
            let mut steps = 0u32;
            match &vals {
                Values::Mod(p, v) => {
                    let mut buf = vec![0u64; len];
                    odometer(v.len(), len, first, |idx| {
                        for (b, &i) in buf.iter_mut().zip(idx) {
                            *b = v[i];
                        }
                        acc.insert_u64(det_mod_p(&mut buf, n, *p));
                        steps = steps.wrapping_add(1);
                        !steps.is_multiple_of(4096) || !clock.tick()
                    });
                }
                Values::Int(v) => {
                    let mut buf = vec![0i128; len];
                    odometer(v.len(), len, first, |idx| {
                        for (b, &i) in buf.iter_mut().zip(idx) {
                            *b = v[i];
                        }
                        match det_bareiss_i128(&mut buf, n) {
                            Some(d) => acc.insert(BigInt::from(d)),
                            None => {
                                let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                                acc.insert(big_det(ring, &big, idx, n));
                            }
                        }
                        steps = steps.wrapping_add(1);
                        !steps.is_multiple_of(4096) || !clock.tick()
                    });
                }
                Values::Big(v) => {
                    odometer(v.len(), len, first, |idx| {
                        acc.insert(big_det(ring, v, idx, n));
                        steps = steps.wrapping_add(1);
                        !steps.is_multiple_of(256) || !clock.tick()
                    });
                }
            }
            acc
        })
        .reduce(|| Acc::new(ring), Acc::merge);
    clock.check(budget)?;
    Ok(acc.into_set(ring))
}

/// Last-row cofactor vectors of every top `(n-1) x n` block starting with
/// `first`, deduplicated, as ring elements.
fn cofactor_vectors(
    ring: Ring,
    vals: &Values,
    n: usize,
    first: usize,
    clock: &Clock,
) -> HashSet<Vec<BigInt>> {
    let rows = n - 1;
    let len = rows * n;
    let mut out = HashSet::new();
    let mut steps = 0u32;
    let keep_going = |steps: &mut u32| {
        *steps = steps.wrapping_add(1);
        !(*steps).is_multiple_of(1024) || !clock.tick()
    };
    // Column j is dropped; sign (-1)^((n-1)+j).
    let negative = |j: usize| (rows + j) % 2 == 1;
    match vals {
        Values::Mod(p, v) => {
            let mut minor = vec![0u64; rows * rows];
            let mut seen: HashSet<Vec<u64>> = HashSet::new();
            odometer(v.len(), len, first, |idx| {
                let c: Vec<u64> = (0..n)
                    .map(|j| {
                        fill_minor(&mut minor, idx, n, j, |i| v[i]);
                        let d = det_mod_p(&mut minor, rows, *p);
                        if negative(j) { sub_mod(0, d, *p) } else { d }
                    })
                    .collect();
                seen.insert(c);
                keep_going(&mut steps)
            });
            out.extend(seen.into_iter().map(|c| c.into_iter().map(BigInt::from).collect()));
        }
        Values::Int(v) => {
            let mut minor = vec![0i128; rows * rows];
            odometer(v.len(), len, first, |idx| {
                let c: Vec<BigInt> = (0..n)
                    .map(|j| {
                        fill_minor(&mut minor, idx, n, j, |i| v[i]);
                        let d = match det_bareiss_i128(&mut minor, rows) {
                            Some(d) => BigInt::from(d),
                            None => big_minor(ring, idx, n, j, |i| BigInt::from(v[i])),
                        };
                        if negative(j) { -d } else { d }
                    })
                    .collect();
                out.insert(c);
                keep_going(&mut steps)
            });
        }
        Values::Big(v) => {
            odometer(v.len(), len, first, |idx| {
                let c: Vec<BigInt> = (0..n)
                    .map(|j| {
                        let d = big_minor(ring, idx, n, j, |i| v[i].clone());
                        if negative(j) { -d } else { d }
                    })
                    .collect();
                out.insert(c);
                keep_going(&mut steps)
            });
        }
    }
    out
}

fn fill_minor<T: Copy>(minor: &mut [T], idx: &[usize], n: usize, skip: usize, val: impl Fn(usize) -> T) {
    let mut k = 0;
    for r in 0..n - 1 {
        for c in (0..n).filter(|&c| c != skip) {
            minor[k] = val(idx[r * n + c]);
            k += 1;
        }
    }
}

fn big_minor(ring: Ring, idx: &[usize], n: usize, skip: usize, val: impl Fn(usize) -> BigInt) -> BigInt {
    let rows = n - 1;
    let mut entries = Vec::with_capacity(rows * rows);
    for r in 0..rows {
        for c in (0..n).filter(|&c| c != skip) {
            entries.push(val(idx[r * n + c]));
        }
    }
    Matrix::new(ring, rows, rows, entries).unwrap().det().unwrap()
}

/// `D_n(A)` from the cofactor expansion along the last row.
pub fn dset_cofactor(a: &ElemSet, n: usize, budget: &EnumBudget) -> Result<ElemSet> {
    check_inputs(a, n)?;
    if n == 1 {
        return Ok(a.clone());
    }
    check_count(a.len(), n * (n - 1), budget)?;
    let ring = a.ring();
    let vals = Values::of(a);
    let clock = Clock::new(budget);
    let acc = (0..vals.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = Acc::new(ring);
            for c in cofactor_vectors(ring, &vals, n, first, &clock) {
                if clock.tick() {
                    break;
                }
                let mut s = dilate(&c[0], a);
                for cj in &c[1..] {
                    s = sumset(&s, &dilate(cj, a)).expect("same ring");
                }
                acc.insert_set(&s);
            }
            acc
        })
        .reduce(|| Acc::new(ring), Acc::merge);
    clock.check(budget)?;
    Ok(acc.into_set(ring))
}

/// Shared setup of the block-doubled constructions for matrix size `2k`.
struct Constructive {
    ring: Ring,
    k: usize,
    unit: Elem,
    diff: ElemSet,
    lift: DifferenceLift,
}

impl Constructive {
    fn new(a: &ElemSet, k: usize) -> Result<Self> {
        let ring = a.ring();
        let diff = difference_set(a);
        let unit = ring.least_nonzero(diff.to_vec().iter()).expect("|A| >= 2");
        Ok(Constructive { ring, k, unit, diff, lift: DifferenceLift::new(a)? })
    }

    /// `(m, n)` with gadget size `m(n-1)+1 = k`, ascending in `n`.
    fn shapes(&self) -> Vec<(usize, usize)> {
        if self.k == 1 {
            return vec![(1, 1)];
        }
        (2..=self.k).filter(|n| (self.k - 1).is_multiple_of(n - 1)).map(|n| ((self.k - 1) / (n - 1), n)).collect()
    }

    /// `det(M0) * unit^(k-n)`: the dilation relating `m (A-A)^n` to the
    /// determinants realized at size `2k`.
    fn scale(&self, n: usize) -> Elem {
        let r = self.ring;
        r.mul(&self.lift.corner_det(self.k), &r.pow(&self.unit, (self.k - n) as u64))
    }
}

fn check_constructive_size(a: &ElemSet, size: usize) -> Result<()> {
    check_inputs(a, size)?;
    if size > 1 && a.len() >= 2 && size % 2 == 1 {
        return Err(Error::NotConstructible(size));
    }
    Ok(())
}

/// A certified subset of `D_size(A)` for even `size = 2k`: the union over
/// all `m(n-1)+1 = k` of `det(M0) * u^(k-n) * m (A-A)^n`, where `u` is the
/// least nonzero difference. Every element has a witness via
/// [`constructive_witness`]. Size 1 returns `A`; `|A| = 1` returns `{0}`.
pub fn dset_lower_bound_constructive(a: &ElemSet, size: usize) -> Result<ElemSet> {
    check_constructive_size(a, size)?;
    let ring = a.ring();
    if size == 1 {
        return Ok(a.clone());
    }
    if a.len() == 1 {
        return Ok(ElemSet::from_elems(ring, [BigInt::zero()]));
    }
    let c = Constructive::new(a, size / 2)?;
    let mut out = ElemSet::empty(ring);
    for (m, n) in c.shapes() {
        let sums = iter_sumset(m, &iter_productset(n, &c.diff)?)?;
        out = out.union(&dilate(&c.scale(n), &sums))?;
    }
    Ok(out)
}

/// A matrix over `A` of size `size` with determinant `t`, for any `t` in
/// [`dset_lower_bound_constructive`]`(A, size)`.
pub fn constructive_witness(a: &ElemSet, size: usize, t: &Elem) -> Result<GadgetWitness> {
    check_constructive_size(a, size)?;
    let ring = a.ring();
    let t = ring.reduce(t);
    if size == 1 || a.len() == 1 {
        let x = a.iter().next().unwrap();
        let m = Matrix::new(ring, size, size, vec![x.clone(); size * size])?;
        let value = if size == 1 { x } else { ring.zero() };
        if value != t {
            return Err(Error::NotAMember(t));
        }
        return GadgetWitness::new(m, value, Vec::new(), ring.one(), Some(a.clone()));
    }
    let c = Constructive::new(a, size / 2)?;
    for (m, n) in c.shapes() {
        let scale = c.scale(n);
        let Some(s) = ring.div_exact(&t, &scale) else { continue };
        let products = traced_iter_productset(n, &c.diff)?;
        let sums = traced_iter_sumset(m, products.set())?;
        // m (A-A)^n is symmetric, so the gadget sign can be absorbed.
        let wanted = ring.mul(&gadget_sign(ring, n), &s);
        let Some(terms) = sums.decompose(&wanted) else { continue };
        let rows = terms.iter().map(|x| products.decompose(x).expect("summand in (A-A)^n")).collect();
        let inner = build_gadget_scaled(ring, &Assignment::new(m, n, rows)?, &c.unit)?;
        let lifted = c.lift.lift(inner.matrix())?;
        if lifted.value() != &t {
            return Err(Error::Verification(format!("constructive witness has value {}", lifted.value())));
        }
        return GadgetWitness::new(
            lifted.matrix().clone(),
            t,
            inner.assignment().to_vec(),
            scale,
            Some(a.clone()),
        );
    }
    Err(Error::NotAMember(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::{productset, sumset as ss};

    fn fp(p: u64) -> Ring {
        Ring::prime_field(p).unwrap()
    }

    fn budget(method: Method) -> EnumBudget {
        EnumBudget::new(10_000_000, 60.0, method).unwrap()
    }

    fn ints(s: &ElemSet) -> Vec<i64> {
        s.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    #[test]
    fn naive_examples() {
        let z = Ring::integers();
        for n in 1..=3 {
            assert_eq!(ints(&dset_naive(&ElemSet::from_i64s(z, &[0]), n, &budget(Method::Naive)).unwrap()), [0]);
        }
        let a = ElemSet::from_i64s(z, &[0, 1]);
        assert_eq!(ints(&dset_naive(&a, 2, &budget(Method::Naive)).unwrap()), [-1, 0, 1]);
        let a = ElemSet::from_i64s(fp(5), &[0, 1]);
        assert_eq!(ints(&dset_naive(&a, 2, &budget(Method::Naive)).unwrap()), [0, 1, 4]);
    }

    #[test]
    fn degenerate_and_budget() {
        let z = Ring::integers();
        let a = ElemSet::from_i64s(z, &[0, 1]);
        for m in [Method::Naive, Method::Cofactor] {
            assert!(matches!(dset(&ElemSet::empty(z), 2, &budget(m)), Err(Error::Degenerate(_))));
            assert!(matches!(dset(&a, 0, &budget(m)), Err(Error::Degenerate(_))));
        }
        let tight = EnumBudget::new(15, 60.0, Method::Naive).unwrap();
        assert!(matches!(dset_naive(&a, 2, &tight), Err(Error::BudgetExceeded(_))));
        // cofactor only needs |A|^(n(n-1)) = 4
        assert_eq!(ints(&dset_cofactor(&a, 2, &tight.with_method(Method::Cofactor)).unwrap()), [-1, 0, 1]);
        let big = ElemSet::from_i64s(z, &(0..10).collect::<Vec<_>>());
        assert!(matches!(dset_naive(&big, 10, &budget(Method::Naive)), Err(Error::BudgetExceeded(_))));
        assert!(EnumBudget::new(0, 1.0, Method::Naive).is_err());
    }

    #[test]
    fn cofactor_agrees_with_naive() {
        for (ring, elems, n) in [
            (fp(5), vec![0, 1, 2], 2),
            (fp(7), vec![0, 1], 3),
            (fp(5), vec![1, 3], 3),
            (Ring::integers(), vec![-2, 0, 1], 2),
            (Ring::integers(), vec![1, 2], 3),
        ] {
            let a = ElemSet::from_i64s(ring, &elems);
            assert_eq!(
                dset_naive(&a, n, &budget(Method::Naive)).unwrap(),
                dset_cofactor(&a, n, &budget(Method::Cofactor)).unwrap(),
                "{ring} {elems:?} n={n}"
            );
        }
    }

    #[test]
    fn d2_is_aa_minus_aa() {
        let r = fp(7);
        for elems in [vec![0, 1], vec![2, 3, 5], vec![1, 6]] {
            let a = ElemSet::from_i64s(r, &elems);
            let aa = productset(&a, &a).unwrap();
            let expect = ss(&aa, &crate::setalg::negate(&aa)).unwrap();
            assert_eq!(dset_naive(&a, 2, &budget(Method::Naive)).unwrap(), expect);
        }
    }

    #[test]
    fn large_integer_entries() {
        let z = Ring::integers();
        let a = ElemSet::from_elems(z, [BigInt::from(1) << 80, BigInt::from(3)]);
        let naive = dset_naive(&a, 2, &budget(Method::Naive)).unwrap();
        let cof = dset_cofactor(&a, 2, &budget(Method::Cofactor)).unwrap();
        assert_eq!(naive, cof);
        assert!(naive.contains(&(BigInt::from(3) * (BigInt::from(1) << 80) - 9)));
    }

    #[test]
    fn constructive_examples() {
        let r = fp(11);
        let a = ElemSet::from_i64s(r, &[0]);
        assert_eq!(ints(&dset_lower_bound_constructive(&a, 4).unwrap()), [0]);
        let a = ElemSet::from_i64s(r, &[1, 3, 4]);
        assert_eq!(dset_lower_bound_constructive(&a, 1).unwrap(), a);
        assert_eq!(dset_lower_bound_constructive(&a, 5), Err(Error::NotConstructible(5)));
        let d4 = dset_cofactor(&a, 4, &budget(Method::Cofactor)).unwrap();
        let lower = dset_lower_bound_constructive(&a, 4).unwrap();
        // size 4 only admits m = 1, n = 2
        let diff = difference_set(&a);
        assert_eq!(lower.len(), iter_productset(2, &diff).unwrap().len());
        assert!(lower.is_subset(&d4));
    }

    #[test]
    fn constructive_witnesses_verify() {
        for (ring, elems) in [(fp(7), vec![1, 3]), (fp(13), vec![2, 5, 6]), (Ring::integers(), vec![0, 1, 3]), (Ring::integers(), vec![-2, 5])] {
            let a = ElemSet::from_i64s(ring, &elems);
            for size in [2, 4, 6] {
                let lower = dset_lower_bound_constructive(&a, size).unwrap();
                for t in lower.iter() {
                    let w = constructive_witness(&a, size, &t).unwrap();
                    assert_eq!(w.size(), size);
                    assert_eq!(w.matrix().det().unwrap(), t);
                    assert!(w.matrix().entries().iter().all(|x| a.contains(x)));
                }
            }
        }
    }
}
