//! Check suites run by `detset verify`.
//!
//! Random instances are drawn sequentially from a per-suite ChaCha stream,
//! then checked in parallel and collected in order, so the reports depend
//! only on the seed.

use clap::ValueEnum;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::bounds::{
    cauchy_davenport_sweep, check_cor3, check_cor4, check_example1, check_glk_inner, check_lemma2,
    check_lemma2_chain, lemma2_sweep, subset_from_mask, BoundReport, Status,
};
use crate::enumerate::{dset_cofactor, dset_naive, EnumBudget};
use crate::error::{Error, Result};
use crate::gadgets::{build_gadget, build_m0, gadget_size, Assignment, WitnessSynthesizer};
use crate::matrix::{block2x2, elem_to_json, sub, Matrix};
use crate::ring::{Elem, Ring};
use crate::setalg::{iter_productset, iter_sumset, negate, productset, sumset, ElemSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Lemma1,
    Theorem1,
    Lemma2,
    Cor3,
    Cor4,
    Example1,
    Permanent,
    Cd,
    Dset,
    Synthesis,
    All,
}

impl Suite {
    const EVERY: [Suite; 10] = [
        Suite::Lemma1,
        Suite::Theorem1,
        Suite::Lemma2,
        Suite::Cor3,
        Suite::Cor4,
        Suite::Example1,
        Suite::Permanent,
        Suite::Cd,
        Suite::Dset,
        Suite::Synthesis,
    ];

    /// Concrete suites named by `list`, deduplicated, in canonical order.
    pub fn expand(list: &[Suite]) -> Vec<Suite> {
        let mut out: Vec<Suite> =
            list.iter().flat_map(|s| if *s == Suite::All { Suite::EVERY.to_vec() } else { vec![*s] }).collect();
        out.sort();
        out.dedup();
        out
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Set and delta for the coverage suite.
    pub cor4: (ElemSet, f64),
    pub cover_budget: usize,
    pub enum_budget: EnumBudget,
}

pub fn run(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ suite.salt());
    match suite {
        Suite::Lemma1 => lemma1(&mut rng, cfg),
        Suite::Theorem1 => theorem1(&mut rng, cfg),
        Suite::Lemma2 => lemma2(&mut rng),
        Suite::Cor3 => cor3(cfg),
        Suite::Cor4 => Ok(vec![check_cor4(&cfg.cor4.0, cfg.cor4.1, cfg.cover_budget)?]),
        Suite::Example1 => example1(cfg),
        Suite::Permanent => permanent(&mut rng, cfg),
        Suite::Cd => cd(),
        Suite::Dset => dset_suite(cfg),
        Suite::Synthesis => synthesis(),
        Suite::All => Suite::expand(&[Suite::All]).into_iter().map(|s| run(s, cfg)).collect::<Result<Vec<_>>>().map(|v| v.concat()),
    }
}

type Outcome = std::result::Result<(), Value>;

fn failed(e: Error) -> Value {
    json!({"error": e.to_string()})
}

/// Aggregates per-instance outcomes: lhs counts passes, rhs is the total.
fn summary(name: &str, inputs: Value, outcomes: Vec<Outcome>) -> BoundReport {
    let total = outcomes.len();
    let failures: Vec<Value> = outcomes.into_iter().filter_map(Result::err).collect();
    let inputs = match inputs {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    BoundReport {
        name: name.into(),
        inputs,
        lhs: BigInt::from(total - failures.len()),
        rhs: total as f64,
        rhs_exact: Some(total.to_string()),
        status: if failures.is_empty() { Status::Pass } else { Status::Fail },
        witnesses: (!failures.is_empty())
            .then(|| json!({"failed": failures.len(), "first": failures.iter().take(5).collect::<Vec<_>>()})),
    }
}

fn report_outcome(r: Result<BoundReport>) -> Outcome {
    match r {
        Ok(r) if r.ok() => Ok(()),
        Ok(r) => Err(r.to_json()),
        Err(e) => Err(failed(e)),
    }
}

fn fp(p: u64) -> Ring {
    Ring::prime_field(p).expect("prime")
}

fn random_elem(rng: &mut ChaCha8Rng, ring: Ring) -> Elem {
    match ring.modulus() {
        Some(p) => BigInt::from(rng.gen_range(0..p)),
        None => BigInt::from(rng.gen_range(-9i64..=9)),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, ring: Ring, n: usize) -> Matrix {
    let entries = (0..n * n).map(|_| random_elem(rng, ring)).collect();
    Matrix::new(ring, n, n, entries).expect("positive size")
}

fn random_assignment(rng: &mut ChaCha8Rng, ring: Ring, m: usize, n: usize) -> Assignment {
    let rows = (0..m).map(|_| (0..n).map(|_| random_elem(rng, ring)).collect()).collect();
    Assignment::new(m, n, rows).expect("shape")
}

fn elems_json(xs: &[Elem]) -> Value {
    xs.iter().map(elem_to_json).collect()
}

fn theorem1(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let rings = [fp(2), fp(3), fp(5), fp(7), fp(101), Ring::integers()];
    let cases: Vec<(Ring, Assignment)> = (0..cfg.trials)
        .map(|i| {
            let ring = rings[i % rings.len()];
            let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
            (ring, random_assignment(rng, ring, m, n))
        })
        .collect();
    let outcomes = cases
        .par_iter()
        .map(|(ring, asg)| {
            let (m, n) = (asg.m(), asg.n());
            let expect = ring.mul(&ring.sign(n as u64 + 1), &asg.sum_of_products(*ring));
            let w = build_gadget(*ring, asg).map_err(failed)?;
            let det = w.matrix().det().map_err(failed)?;
            if det == expect && w.size() == gadget_size(m, n) {
                Ok(())
            } else {
                Err(json!({"ring": ring.to_string(), "m": m, "n": n, "det": elem_to_json(&det), "expected": elem_to_json(&expect)}))
            }
        })
        .collect();
    Ok(vec![summary("theorem1", json!({"trials": cfg.trials, "seed": cfg.seed}), outcomes)])
}

fn lemma1(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let rings = [fp(7), fp(101), Ring::integers()];
    let cases: Vec<[Matrix; 3]> = (0..cfg.trials)
        .map(|i| {
            let ring = rings[i % rings.len()];
            let n = rng.gen_range(1..=4);
            [random_matrix(rng, ring, n), random_matrix(rng, ring, n), random_matrix(rng, ring, n)]
        })
        .collect();
    let outcomes = cases
        .par_iter()
        .map(|[m0, m1, m2]| {
            let ring = m0.ring();
            let lhs = block2x2(m0, m1, m0, m2).and_then(|b| b.det()).map_err(failed)?;
            let rhs = ring.mul(&m0.det().map_err(failed)?, &sub(m2, m1).and_then(|d| d.det()).map_err(failed)?);
            if lhs == rhs {
                Ok(())
            } else {
                Err(json!({"ring": ring.to_string(), "n": m0.rows(), "lhs": elem_to_json(&lhs), "rhs": elem_to_json(&rhs)}))
            }
        })
        .collect();
    let mut out = vec![summary("lemma1", json!({"trials": cfg.trials, "seed": cfg.seed}), outcomes)];

    let ring = fp(7);
    let mut outcomes = Vec::new();
    for n in 1..=5usize {
        for a in 0..7u64 {
            for b in 0..7u64 {
                let (a, b) = (BigInt::from(a), BigInt::from(b));
                let expect = ring.mul(&b, &ring.pow(&ring.sub(&b, &a), n as u64 - 1));
                // The shape is built here independently; the identity holds for
                // every pair, while build_m0 only accepts nonsingular pivots.
                let entries = (0..n * n).map(|i| if i < n || i % (n + 1) == 0 { b.clone() } else { a.clone() }).collect();
                let shape = Matrix::new(ring, n, n, entries)?;
                let det = shape.det_oracle()?;
                let valid = !b.is_zero() && a != b;
                let outcome = match build_m0(ring, &a, &b, n) {
                    Ok(m) if det == expect && valid && m == shape => Ok(()),
                    Err(Error::BadPivotPair { .. }) if det == expect && !valid => Ok(()),
                    other => Err(json!({
                        "n": n, "a": elem_to_json(&a), "b": elem_to_json(&b),
                        "det": elem_to_json(&det), "expected": elem_to_json(&expect),
                        "built": other.is_ok(),
                    })),
                };
                outcomes.push(outcome);
            }
        }
    }
    out.push(summary("lemma1_m0", json!({"p": 7, "n_max": 5}), outcomes));
    Ok(out)
}

fn random_subset(rng: &mut ChaCha8Rng, ring: Ring, p: u64, size: Option<usize>) -> ElemSet {
    match size {
        Some(k) => {
            let mut picked = std::collections::BTreeSet::new();
            while picked.len() < k {
                picked.insert(rng.gen_range(0..p));
            }
            ElemSet::from_elems(ring, picked.into_iter().map(BigInt::from))
        }
        None => loop {
            let mask = rng.gen_range(1..1u64 << p) & rng.gen_range(1..1u64 << p);
            if mask != 0 {
                break subset_from_mask(ring, mask);
            }
        },
    }
}

fn lemma2(rng: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for p in [2, 3, 5, 7, 11, 13] {
        let reports = lemma2_sweep(p, 1)?;
        let count = reports.len();
        let outcomes = reports.into_iter().map(|r| report_outcome(Ok(r))).collect();
        out.push(summary("lemma2_sweep", json!({"p": p, "n": 1, "subsets": count}), outcomes));
    }
    let ring = fp(31);
    let sets: Vec<ElemSet> = (0..200).map(|_| random_subset(rng, ring, 31, None)).collect();
    let outcomes = sets.par_iter().map(|a| report_outcome(check_lemma2(a, 2))).collect();
    out.push(summary("lemma2_n2", json!({"p": 31, "n": 2, "sets": sets.len()}), outcomes));
    let outcomes = sets.par_iter().map(|a| report_outcome(check_lemma2_chain(a, 2))).collect();
    out.push(summary("lemma2_chain", json!({"p": 31, "n": 2, "sets": sets.len()}), outcomes));
    let big: Vec<ElemSet> = (0..50).map(|_| random_subset(rng, ring, 31, Some(5))).collect();
    let outcomes = big.par_iter().map(|a| report_outcome(check_glk_inner(a, 2))).collect();
    out.push(summary("glk_inner", json!({"p": 31, "n": 2, "set_size": 5, "sets": big.len()}), outcomes));
    Ok(out)
}

/// Small instances whose determinant sets are enumerated exactly:
/// `A ⊆ F_5` with `|A| <= 3` and `n` in `{2, 3}`, `A ⊆ {-2..2}` over the
/// integers with `|A| <= 3` and `n = 2`, and `A ⊆ F_7` with `|A| <= 3`, `n = 2`.
pub fn enumerated_instances() -> Vec<(String, ElemSet, usize)> {
    let mut out = Vec::new();
    let small = |mask: u64| mask.count_ones() <= 3;
    for n in [2, 3] {
        for mask in (1..1u64 << 5).filter(|&m| small(m)) {
            out.push(("F_5".into(), subset_from_mask(fp(5), mask), n));
        }
    }
    let z = Ring::integers();
    for mask in (1..1u64 << 5).filter(|&m| small(m)) {
        let elems: Vec<i64> = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| i - 2).collect();
        out.push(("Z".into(), ElemSet::from_i64s(z, &elems), 2));
    }
    for mask in (1..1u64 << 7).filter(|&m| small(m)) {
        out.push(("F_7".into(), subset_from_mask(fp(7), mask), 2));
    }
    out
}

fn cor3(cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let cases = enumerated_instances();
    let outcomes = cases
        .par_iter()
        .map(|(_, a, n)| {
            let d = dset_cofactor(a, *n, &cfg.enum_budget).map_err(failed)?;
            report_outcome(check_cor3(a, *n, d.len()))
        })
        .collect();
    Ok(vec![summary("cor3", json!({"instances": cases.len()}), outcomes)])
}

fn dset_suite(cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let cases = enumerated_instances();
    let outcomes = cases
        .par_iter()
        .map(|(family, a, n)| {
            let naive = dset_naive(a, *n, &cfg.enum_budget).map_err(failed)?;
            let cof = dset_cofactor(a, *n, &cfg.enum_budget).map_err(failed)?;
            if naive == cof {
                Ok(())
            } else {
                Err(json!({"ring": family, "set": elems_json(&a.to_vec()), "n": n, "naive": naive.len(), "cofactor": cof.len()}))
            }
        })
        .collect();
    let mut out = vec![summary("dset_oracle", json!({"instances": cases.len()}), outcomes)];

    let d2: Vec<&(String, ElemSet, usize)> = cases.iter().filter(|(f, _, n)| f == "F_7" && *n == 2).collect();
    let outcomes = d2
        .par_iter()
        .map(|(_, a, _)| {
            let naive = dset_naive(a, 2, &cfg.enum_budget).map_err(failed)?;
            let aa = productset(a, a).map_err(failed)?;
            let expect = sumset(&aa, &negate(&aa)).map_err(failed)?;
            if naive == expect {
                Ok(())
            } else {
                Err(json!({"set": elems_json(&a.to_vec()), "d2": naive.len(), "aa_minus_aa": expect.len()}))
            }
        })
        .collect();
    out.push(summary("dset_d2", json!({"p": 7, "instances": d2.len()}), outcomes));
    Ok(out)
}

fn example1(cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for m in [1, 2, 3] {
            out.push(check_example1(m, n, &cfg.enum_budget)?);
        }
    }
    Ok(out)
}

fn permanent(rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let rings = [Ring::integers(), fp(101)];
    let cases: Vec<(Ring, Assignment)> = (0..cfg.trials)
        .map(|i| {
            let ring = rings[i % rings.len()];
            loop {
                let (m, n) = (rng.gen_range(1..=12), rng.gen_range(1..=13));
                if gadget_size(m, n) <= 13 {
                    break (ring, random_assignment(rng, ring, m, n));
                }
            }
        })
        .collect();
    // Per instance: Ok(Some(+1 or -1)) when det != 0 fixes the ratio.
    let ratios: Vec<std::result::Result<Option<i8>, Value>> = cases
        .par_iter()
        .map(|(ring, asg)| {
            let w = build_gadget(*ring, asg).map_err(failed)?;
            let det = w.matrix().det().map_err(failed)?;
            let perm = w.matrix().permanent().map_err(failed)?;
            if det.is_zero() && perm.is_zero() {
                Ok(None)
            } else if perm == det {
                Ok(Some(1))
            } else if perm == ring.neg(&det) {
                Ok(Some(-1))
            } else {
                Err(json!({"ring": ring.to_string(), "m": asg.m(), "n": asg.n(), "det": elem_to_json(&det), "perm": elem_to_json(&perm)}))
            }
        })
        .collect();
    let mut seen = std::collections::BTreeMap::new();
    let outcomes = cases
        .iter()
        .zip(ratios)
        .map(|((_, asg), r)| match r? {
            Some(s) => match *seen.entry((asg.m(), asg.n())).or_insert(s) {
                prev if prev == s => Ok(()),
                _ => Err(json!({"m": asg.m(), "n": asg.n(), "reason": "sign ratio changed"})),
            },
            None => Ok(()),
        })
        .collect();
    Ok(vec![summary("permanent", json!({"trials": cfg.trials, "seed": cfg.seed, "max_size": 13}), outcomes)])
}

fn cd() -> Result<Vec<BoundReport>> {
    [2, 3, 5, 7]
        .into_iter()
        .map(|p| {
            let (count, bad) = cauchy_davenport_sweep(p)?;
            let mut outcomes: Vec<Outcome> = vec![Ok(()); count - bad.len()];
            outcomes.extend(bad.into_iter().map(|r| Err(r.to_json())));
            Ok(summary("cd_sweep", json!({"p": p, "pairs": count}), outcomes))
        })
        .collect()
}

fn synthesis() -> Result<Vec<BoundReport>> {
    let ring = fp(5);
    let a = ElemSet::from_i64s(ring, &[0, 1, 4]);
    let mut outcomes = Vec::new();
    for m in 1..=3 {
        for n in 1..=3 {
            let synth = WitnessSynthesizer::new(&a, m, n)?;
            let reachable = iter_sumset(m, &iter_productset(n, &a)?)?;
            for t in 0..5u64 {
                let t = BigInt::from(t);
                let outcome = match synth.synthesize(&t) {
                    Ok(w) if reachable.contains(&t) => {
                        let in_a = w.matrix().entries().iter().all(|x| a.contains(x));
                        if in_a && w.matrix().det().ok().as_ref() == Some(&t) {
                            Ok(())
                        } else {
                            Err(json!({"m": m, "n": n, "target": elem_to_json(&t), "reason": "witness does not verify"}))
                        }
                    }
                    Err(Error::NotAMember(_)) if !reachable.contains(&t) => Ok(()),
                    Ok(_) => Err(json!({"m": m, "n": n, "target": elem_to_json(&t), "reason": "witness for unreachable target"})),
                    Err(e) => Err(json!({"m": m, "n": n, "target": elem_to_json(&t), "error": e.to_string()})),
                };
                outcomes.push(outcome);
            }
        }
    }
    Ok(vec![summary("synthesis", json!({"p": 5, "set": [0, 1, 4], "m_max": 3, "n_max": 3}), outcomes)])
}
