//! Checkers for the size inequalities on sumsets, product sets and
//! determinant sets. Each returns a [`BoundReport`] with both sides of the
//! inequality, so a failure carries the numbers that caused it.
//!
//! Rational right-hand sides are compared exactly by cross-multiplication.
//! The one irrational case, `|A|^(0.1 log2 n)`, is compared in floating
//! point with a `1e-9` margin added to the right-hand side.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::enumerate::{dset, EnumBudget};
use crate::error::{Error, Result};
use crate::gadgets::coverage_certificate;
use crate::matrix::elem_to_json;
use crate::ring::Ring;
use crate::setalg::{difference_set, iter_productset, iter_sumset, sumset, ElemSet};

/// Exponent constant in `|D_n(A)| >= 1/8 min(|A|^(c log2 n), p)`.
pub const COR3_C: f64 = 0.1;

/// Margin added to floating right-hand sides before comparing.
pub const FLOAT_SLACK: f64 = 1e-9;

/// Largest `n` accepted by the `8^n A^n` checks.
pub const LEMMA2_MAX_N: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Map<String, Value>,
    pub lhs: BigInt,
    pub rhs: f64,
    /// The right-hand side as a reduced fraction when it is rational.
    pub rhs_exact: Option<String>,
    pub status: Status,
    pub witnesses: Option<Value>,
}

impl BoundReport {
    /// True unless the inequality was evaluated and failed.
    pub fn ok(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "inputs": self.inputs,
            "lhs": elem_to_json(&self.lhs),
            "rhs": self.rhs,
            "rhs_exact": self.rhs_exact,
            "status": self.status,
            "pass": self.pass(),
            "witnesses": self.witnesses,
        })
    }

    pub const CSV_HEADER: &'static str = "name,p,set_size,n,lhs,rhs,pass";

    pub fn to_csv(&self) -> String {
        let field = |k: &str| match self.inputs.get(k) {
            Some(Value::Null) | None => String::new(),
            Some(v) => v.to_string(),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.name,
            field("p"),
            field("set_size"),
            field("n"),
            self.lhs,
            self.rhs_exact.clone().unwrap_or_else(|| self.rhs.to_string()),
            self.pass()
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:<14} {:?}", self.name, self.status);
        for (k, v) in &self.inputs {
            let _ = write!(s, " {k}={v}");
        }
        let rhs = self.rhs_exact.clone().unwrap_or_else(|| format!("{:.6}", self.rhs));
        let _ = write!(s, " lhs={} rhs={rhs}", self.lhs);
        s
    }
}

/// Nonnegative fraction `num / den` with `den > 0`.
#[derive(Clone, Debug)]
struct Frac {
    num: BigInt,
    den: BigInt,
}

impl Frac {
    fn new(num: BigInt, den: BigInt) -> Self {
        let g = num.gcd(&den);
        if g.is_zero() {
            return Frac { num, den };
        }
        Frac { num: num / &g, den: den / &g }
    }

    fn le(&self, x: &BigInt) -> bool {
        self.num <= (x * &self.den)
    }

    fn to_f64(&self) -> f64 {
        let (n, d) = (self.num.to_f64().unwrap_or(f64::INFINITY), self.den.to_f64().unwrap_or(f64::INFINITY));
        n / d
    }

    fn render(&self) -> String {
        if self.den.is_one() {
            self.num.to_string()
        } else {
            format!("{}/{}", self.num, self.den)
        }
    }
}

fn report(name: &str, inputs: Map<String, Value>, lhs: BigInt, rhs: &Frac, witnesses: Option<Value>) -> BoundReport {
    let status = if rhs.le(&lhs) { Status::Pass } else { Status::Fail };
    BoundReport {
        name: name.into(),
        inputs,
        lhs,
        rhs: rhs.to_f64(),
        rhs_exact: Some(rhs.render()),
        status,
        witnesses,
    }
}

fn not_met(name: &str, inputs: Map<String, Value>, reason: &str) -> BoundReport {
    let mut inputs = inputs;
    inputs.insert("reason".into(), reason.into());
    BoundReport {
        name: name.into(),
        inputs,
        lhs: BigInt::zero(),
        rhs: 0.0,
        rhs_exact: None,
        status: Status::HypothesisNotMet,
        witnesses: None,
    }
}

fn set_inputs(a: &ElemSet) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("ring".into(), a.ring().to_string().into());
    m.insert("p".into(), a.ring().modulus().into());
    m.insert("set".into(), a.iter().map(|x| elem_to_json(&x)).collect());
    m.insert("set_size".into(), a.len().into());
    m
}

fn big(x: usize) -> BigInt {
    BigInt::from(x)
}

/// `min(x, p)` over `F_p`, plain `x` over the integers.
fn cap(ring: Ring, x: BigInt) -> BigInt {
    match ring.modulus() {
        Some(p) => x.min(BigInt::from(p)),
        None => x,
    }
}

/// `N_n = (5/24) 4^n - 1/3`, rejected unless it is an integer.
pub fn difference_multiplier(n: usize) -> Result<u64> {
    let pow4: BigInt = BigInt::one() << (2 * n);
    let num = BigInt::from(5) * pow4 - BigInt::from(8);
    let (q, r) = num.div_rem(&BigInt::from(24));
    if !r.is_zero() || q.is_negative() {
        return Err(Error::NonIntegerMultiplier(Frac::new(num, BigInt::from(24)).render()));
    }
    q.to_u64().ok_or_else(|| Error::InvalidArgument(format!("N_{n} does not fit in 64 bits")))
}

fn check_small_n(n: usize) -> Result<()> {
    if n == 0 || n > LEMMA2_MAX_N {
        return Err(Error::InvalidArgument(format!("n must lie in 1..={LEMMA2_MAX_N}, got {n}")));
    }
    Ok(())
}

/// `8^n A^n` as a set.
fn eight_n_a_n(a: &ElemSet, n: usize) -> Result<ElemSet> {
    iter_sumset(1 << (3 * n), &iter_productset(n, a)?)
}

/// `|8^n A^n - 8^n A^n| >= 1/8 min(|A|^n, p)`; over the integers the
/// minimum is just `|A|^n`.
pub fn check_lemma2(a: &ElemSet, n: usize) -> Result<BoundReport> {
    check_small_n(n)?;
    let mut inputs = set_inputs(a);
    inputs.insert("n".into(), n.into());
    let s = difference_set(&eight_n_a_n(a, n)?);
    let rhs = Frac::new(cap(a.ring(), big(a.len()).pow(n as u32)), BigInt::from(8));
    Ok(report("lemma2", inputs, big(s.len()), &rhs, None))
}

/// The containment `N_n (4A)^n - N_n (4A)^n ⊆ 8^n A^n - 8^n A^n` used to
/// pass from the inner estimate to the outer one. It needs `4^n N_n <= 8^n`,
/// which holds for `n = 2` only.
pub fn check_lemma2_chain(a: &ElemSet, n: usize) -> Result<BoundReport> {
    check_small_n(n)?;
    let mut inputs = set_inputs(a);
    inputs.insert("n".into(), n.into());
    let nn = match difference_multiplier(n) {
        Ok(v) => v,
        Err(e) => return Ok(not_met("lemma2_chain", inputs, &e.to_string())),
    };
    inputs.insert("N_n".into(), nn.into());
    if BigInt::from(nn) << (2 * n) > BigInt::one() << (3 * n) {
        return Ok(not_met("lemma2_chain", inputs, "4^n N_n exceeds 8^n"));
    }
    if a.is_empty() {
        return Ok(not_met("lemma2_chain", inputs, "empty set"));
    }
    let inner = iter_sumset(nn as usize, &iter_productset(n, &iter_sumset(4, a)?)?)?;
    let small = difference_set(&inner);
    let large = difference_set(&eight_n_a_n(a, n)?);
    let outside = small.iter().filter(|x| !large.contains(x)).count();
    let mut r = report("lemma2_chain", inputs, big(outside), &Frac::new(BigInt::zero(), BigInt::one()), None);
    // lhs counts elements outside the larger set; the check is lhs == 0
    r.status = if outside == 0 { Status::Pass } else { Status::Fail };
    r.witnesses = Some(json!({"inner_size": small.len(), "outer_size": large.len()}));
    Ok(r)
}

/// `|N_n A^n - N_n A^n| >= 3/8 min(|A|^n, (p-1)/2)` for `|A| >= 5`.
pub fn check_glk_inner(a: &ElemSet, n: usize) -> Result<BoundReport> {
    check_small_n(n)?;
    let p = a.ring().modulus().ok_or_else(|| Error::InvalidArgument("the inner estimate needs a prime field".into()))?;
    let nn = difference_multiplier(n)?;
    let mut inputs = set_inputs(a);
    inputs.insert("n".into(), n.into());
    inputs.insert("N_n".into(), nn.into());
    if a.len() < 5 {
        return Ok(not_met("glk_inner", inputs, "needs |A| >= 5"));
    }
    let s = difference_set(&iter_sumset(nn as usize, &iter_productset(n, a)?)?);
    // 3/8 min(x, (p-1)/2) = min(6x, 3(p-1)) / 16
    let an = big(a.len()).pow(n as u32);
    let rhs = Frac::new((an * BigInt::from(6)).min(BigInt::from(3 * (p - 1))), BigInt::from(16));
    Ok(report("glk_inner", inputs, big(s.len()), &rhs, None))
}

/// `observed >= 1/8 min(|A|^(0.1 log2 n), p)` for an observed `|D_n(A)|`,
/// which may come from enumeration or from a certified subset.
pub fn check_cor3(a: &ElemSet, n: usize, observed: usize) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut inputs = set_inputs(a);
    inputs.insert("n".into(), n.into());
    if a.is_empty() {
        return Ok(not_met("cor3", inputs, "empty set"));
    }
    let lhs = big(observed);
    // Exact when 0.1 log2 n is an integer, i.e. n = 2^(10j).
    if n.is_power_of_two() && n.trailing_zeros().is_multiple_of(10) {
        let e = n.trailing_zeros() / 10;
        let rhs = Frac::new(cap(a.ring(), big(a.len()).pow(e)), BigInt::from(8));
        return Ok(report("cor3", inputs, lhs, &rhs, None));
    }
    let exponent = COR3_C * (n as f64).log2();
    let mut rhs = (a.len() as f64).powf(exponent);
    if let Some(p) = a.ring().modulus() {
        rhs = rhs.min(p as f64);
    }
    rhs /= 8.0;
    let status = if observed as f64 >= rhs + FLOAT_SLACK { Status::Pass } else { Status::Fail };
    Ok(BoundReport { name: "cor3".into(), inputs, lhs, rhs, rhs_exact: None, status, witnesses: None })
}

/// `n* = ceil(8 e^(10 delta))`.
pub fn cor4_threshold(delta: f64) -> usize {
    (8.0 * (10.0 * delta).exp()).ceil() as usize
}

/// Whole-field coverage for `|A| >= p^delta`, checked constructively: the
/// report's lhs is the size of the smallest certified construction, every
/// one of whose `p` witnesses is re-verified, and its rhs is `n*`.
pub fn check_cor4(a: &ElemSet, delta: f64, budget: usize) -> Result<BoundReport> {
    let p = a.ring().modulus().ok_or_else(|| Error::InvalidArgument("coverage needs a prime field".into()))?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mut inputs = set_inputs(a);
    inputs.insert("delta".into(), delta.into());
    inputs.insert("budget".into(), budget.into());
    let n_star = cor4_threshold(delta);
    inputs.insert("n_star".into(), n_star.into());
    if (a.len() as f64).ln() < delta * (p as f64).ln() {
        return Ok(not_met("cor4", inputs, "|A| < p^delta"));
    }
    let mut r = BoundReport {
        name: "cor4".into(),
        inputs,
        lhs: BigInt::zero(),
        rhs: n_star as f64,
        rhs_exact: Some(n_star.to_string()),
        status: Status::Fail,
        witnesses: None,
    };
    let cert = match coverage_certificate(a, budget) {
        Ok(c) => c,
        Err(Error::Insufficient(_)) => return Ok(r),
        Err(e) => return Err(e),
    };
    let witnesses = cert.witnesses()?;
    r.lhs = big(cert.size());
    r.status = Status::Pass;
    let mut w = cert.to_json();
    w["verified"] = witnesses.len().into();
    if p <= 64 {
        w["witnesses"] = witnesses
            .iter()
            .map(|x| json!({"value": elem_to_json(x.value()), "matrix": x.matrix().to_json()["entries"]}))
            .collect();
    }
    r.witnesses = Some(w);
    Ok(r)
}

/// Every element of `D_n({1..m})` over the integers lies in
/// `[-n! m^n, n! m^n]`, and so `|D_n| <= 2 n! m^n + 1`. The lhs is the
/// largest absolute determinant found.
pub fn check_example1(m: usize, n: usize, budget: &EnumBudget) -> Result<BoundReport> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    let ring = Ring::integers();
    let a = ElemSet::from_elems(ring, (1..=m).map(big));
    let mut inputs = set_inputs(&a);
    inputs.insert("m".into(), m.into());
    inputs.insert("n".into(), n.into());
    let d = dset(&a, n, budget)?;
    let bound: BigInt = (1..=n).map(big).product::<BigInt>() * big(m).pow(n as u32);
    let max_abs = d.iter().map(|x| x.abs()).max().unwrap_or_default();
    let size_ok = big(d.len()) <= &bound * BigInt::from(2) + BigInt::one();
    let witnesses = json!({
        "size": d.len(),
        "min": d.iter().next().map(|x| elem_to_json(&x)),
        "max": d.iter().last().map(|x| elem_to_json(&x)),
    });
    let mut r = report("example1", inputs, max_abs.clone(), &Frac::new(BigInt::zero(), BigInt::one()), Some(witnesses));
    r.rhs = bound.to_f64().unwrap_or(f64::INFINITY);
    r.rhs_exact = Some(bound.to_string());
    r.status = if max_abs <= bound && size_ok { Status::Pass } else { Status::Fail };
    Ok(r)
}

/// `|A + B| >= min(p, |A| + |B| - 1)` for nonempty `A, B ⊆ F_p`.
pub fn check_cauchy_davenport(a: &ElemSet, b: &ElemSet) -> Result<BoundReport> {
    let p = a.ring().modulus().ok_or_else(|| Error::InvalidArgument("Cauchy-Davenport needs a prime field".into()))?;
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    let mut inputs = set_inputs(a);
    inputs.insert("other".into(), b.iter().map(|x| elem_to_json(&x)).collect());
    inputs.insert("other_size".into(), b.len().into());
    if a.is_empty() || b.is_empty() {
        return Ok(not_met("cd", inputs, "empty set"));
    }
    let s = sumset(a, b)?;
    let rhs = BigInt::from(p).min(big(a.len() + b.len() - 1));
    Ok(report("cd", inputs, big(s.len()), &Frac::new(rhs, BigInt::one()), None))
}

/// The subset of `F_p` whose elements are the set bits of `mask`.
pub fn subset_from_mask(ring: Ring, mask: u64) -> ElemSet {
    ElemSet::from_elems(ring, (0..64).filter(|i| mask >> i & 1 == 1).map(BigInt::from))
}

fn all_masks(p: u64) -> Result<std::ops::Range<u64>> {
    if p > 20 {
        return Err(Error::InvalidArgument(format!("exhaustive sweeps support p <= 20, got {p}")));
    }
    Ok(0..1u64 << p)
}

/// [`check_lemma2`] for every subset of `F_p`, in mask order.
pub fn lemma2_sweep(p: u64, n: usize) -> Result<Vec<BoundReport>> {
    let ring = Ring::prime_field(p)?;
    let masks: Vec<u64> = all_masks(p)?.collect();
    masks.par_iter().map(|&mask| check_lemma2(&subset_from_mask(ring, mask), n)).collect()
}

/// [`check_cauchy_davenport`] for every ordered pair of nonempty subsets of
/// `F_p`. Only failures are returned, with the number of pairs checked.
pub fn cauchy_davenport_sweep(p: u64) -> Result<(usize, Vec<BoundReport>)> {
    let ring = Ring::prime_field(p)?;
    let sets: Vec<ElemSet> = all_masks(p)?.skip(1).map(|m| subset_from_mask(ring, m)).collect();
    let failures = sets
        .par_iter()
        .map(|a| {
            let mut bad = Vec::new();
            for b in &sets {
                let r = check_cauchy_davenport(a, b)?;
                if !r.pass() {
                    bad.push(r);
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sets.len() * sets.len(), failures.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::Method;

    fn fp(p: u64) -> Ring {
        Ring::prime_field(p).unwrap()
    }

    #[test]
    fn multiplier_values() {
        assert!(matches!(difference_multiplier(1), Err(Error::NonIntegerMultiplier(s)) if s == "1/2"));
        assert_eq!(difference_multiplier(2).unwrap(), 3);
        assert_eq!(difference_multiplier(3).unwrap(), 13);
        assert_eq!(difference_multiplier(4).unwrap(), 53);
    }

    #[test]
    fn difference_bound_examples() {
        let r = check_lemma2(&ElemSet::from_i64s(fp(5), &[0]), 2).unwrap();
        assert_eq!(r.lhs, BigInt::from(1));
        assert_eq!(r.rhs_exact.as_deref(), Some("1/8"));
        assert!(r.pass());
        let r = check_lemma2(&ElemSet::from_i64s(fp(13), &[1, 2]), 1).unwrap();
        // 8A = {8..16} has 9 residues, 8A - 8A is all of F_13
        assert_eq!(r.lhs, BigInt::from(13));
        assert_eq!(r.rhs_exact.as_deref(), Some("1/4"));
        assert!(r.pass());
        let r = check_lemma2(&ElemSet::from_i64s(Ring::integers(), &[0, 1, 5]), 2).unwrap();
        assert_eq!(r.rhs_exact.as_deref(), Some("9/8"));
        assert!(r.pass());
        assert!(check_lemma2(&ElemSet::from_i64s(fp(5), &[1]), 0).is_err());
    }

    #[test]
    fn difference_bound_sweep() {
        for p in [2, 3, 5, 7] {
            let reports = lemma2_sweep(p, 1).unwrap();
            assert_eq!(reports.len(), 1 << p);
            assert!(reports.iter().all(|r| r.pass()));
        }
    }

    #[test]
    fn chain_containment() {
        let a = ElemSet::from_i64s(fp(31), &[2, 7, 11]);
        let r = check_lemma2_chain(&a, 2).unwrap();
        assert!(r.pass(), "{r:?}");
        let r = check_lemma2_chain(&a, 1).unwrap();
        assert_eq!(r.status, Status::HypothesisNotMet);
        let r = check_lemma2_chain(&a, 3).unwrap();
        assert_eq!(r.status, Status::HypothesisNotMet);
    }

    #[test]
    fn inner_estimate_examples() {
        let r = check_glk_inner(&ElemSet::from_i64s(fp(31), &[0, 1, 2, 3]), 2).unwrap();
        assert_eq!(r.status, Status::HypothesisNotMet);
        let r = check_glk_inner(&ElemSet::from_i64s(fp(31), &[1, 4, 9, 16, 25]), 2).unwrap();
        assert!(r.pass());
        assert!(check_glk_inner(&ElemSet::from_i64s(fp(31), &[1, 4, 9, 16, 25]), 1).is_err());
    }

    #[test]
    fn growth_examples() {
        let a = ElemSet::from_i64s(fp(5), &[0, 1]);
        let r = check_cor3(&a, 2, 3).unwrap();
        assert!(r.pass());
        assert!((r.rhs - 2f64.powf(0.1) / 8.0).abs() < 1e-12);
        let r = check_cor3(&a, 1, 2).unwrap();
        assert_eq!(r.rhs_exact.as_deref(), Some("1/8"));
        assert!(r.pass());
        assert!(!check_cor3(&a, 2, 0).unwrap().pass());
        assert_eq!(check_cor3(&ElemSet::empty(fp(5)), 2, 0).unwrap().status, Status::HypothesisNotMet);
    }

    #[test]
    fn coverage_examples() {
        let r = check_cor4(&ElemSet::from_i64s(fp(7), &[1, 3]), 0.01, 64).unwrap();
        assert!(r.pass());
        assert_eq!(r.rhs_exact.as_deref(), Some("9"));
        assert_eq!(r.witnesses.as_ref().unwrap()["verified"], 7);
        let r = check_cor4(&ElemSet::from_i64s(fp(2), &[0, 1]), 0.5, 8).unwrap();
        assert_eq!(r.lhs, BigInt::from(1));
        let r = check_cor4(&ElemSet::from_i64s(fp(101), &[1, 3]), 0.5, 64).unwrap();
        assert_eq!(r.status, Status::HypothesisNotMet);
        let r = check_cor4(&ElemSet::from_i64s(fp(101), &[0, 1]), 0.01, 4).unwrap();
        assert_eq!(r.status, Status::Fail);
        assert_eq!(cor4_threshold(0.01), 9);
    }

    #[test]
    fn range_examples() {
        let b = EnumBudget::new(1_000_000, 60.0, Method::Naive).unwrap();
        let r = check_example1(2, 2, &b).unwrap();
        assert_eq!(r.rhs_exact.as_deref(), Some("8"));
        assert!(r.pass());
        let r = check_example1(1, 3, &b).unwrap();
        assert_eq!(r.lhs, BigInt::zero());
        let r = check_example1(3, 3, &b.with_method(Method::Cofactor)).unwrap();
        assert_eq!(r.rhs_exact.as_deref(), Some("162"));
        assert!(r.pass());
    }

    #[test]
    fn cauchy_davenport_exhaustive() {
        for p in [2, 3, 5, 7] {
            let (count, bad) = cauchy_davenport_sweep(p).unwrap();
            assert_eq!(count, ((1usize << p) - 1).pow(2));
            assert!(bad.is_empty());
        }
        assert!(check_cauchy_davenport(&ElemSet::from_i64s(Ring::integers(), &[1]), &ElemSet::from_i64s(Ring::integers(), &[1])).is_err());
    }

    #[test]
    fn report_rendering() {
        let r = check_lemma2(&ElemSet::from_i64s(fp(13), &[1, 2]), 1).unwrap();
        let j = r.to_json();
        assert_eq!(j["status"], "pass");
        assert_eq!(j["pass"], true);
        assert_eq!(r.to_csv(), "lemma2,13,2,1,13,1/4,true");
        assert!(r.to_text().starts_with("lemma2"));
    }
}
