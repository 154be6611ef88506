//! Iterated sumsets and product sets that remember, for each element, one
//! way of writing it as a sum (product) of generators.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ring::Elem;

use super::ElemSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    Sum,
    Product,
}

/// `m`-fold sumset or product set of `generators` with one back-pointer per
/// element and level.
#[derive(Clone, Debug)]
pub struct TraceSet {
    op: TraceOp,
    generators: ElemSet,
    // back[k - 2] maps x in kX to (y, g) with y in (k-1)X, g in X, y (op) g = x.
    back: Vec<HashMap<Elem, (Elem, Elem)>>,
    set: ElemSet,
}

impl TraceSet {
    fn build(op: TraceOp, m: usize, generators: &ElemSet) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("iteration count must be positive".into()));
        }
        let ring = generators.ring();
        let gens = generators.to_vec();
        let mut level = generators.clone();
        let mut back = Vec::with_capacity(m - 1);
        for _ in 1..m {
            let mut ptr: HashMap<Elem, (Elem, Elem)> = HashMap::new();
            for y in level.iter() {
                for g in &gens {
                    let x = match op {
                        TraceOp::Sum => ring.add(&y, g),
                        TraceOp::Product => ring.mul(&y, g),
                    };
                    ptr.entry(x).or_insert_with(|| (y.clone(), g.clone()));
                }
            }
            level = ElemSet::from_elems(ring, ptr.keys().cloned());
            back.push(ptr);
        }
        Ok(TraceSet { op, generators: generators.clone(), back, set: level })
    }

    pub fn op(&self) -> TraceOp {
        self.op
    }

    /// Number of generators combined per element.
    pub fn arity(&self) -> usize {
        self.back.len() + 1
    }

    pub fn set(&self) -> &ElemSet {
        &self.set
    }

    pub fn generators(&self) -> &ElemSet {
        &self.generators
    }

    /// One decomposition of `x` into `arity()` generators, or `None` when
    /// `x` is not in the set.
    pub fn decompose(&self, x: &Elem) -> Option<Vec<Elem>> {
        let mut x = self.set.ring().reduce(x);
        if !self.set.contains(&x) {
            return None;
        }
        let mut terms = Vec::with_capacity(self.arity());
        for level in self.back.iter().rev() {
            let (y, g) = level.get(&x)?.clone();
            terms.push(g);
            x = y;
        }
        terms.push(x);
        terms.reverse();
        Some(terms)
    }

    /// Re-evaluates a term list with this trace's operation.
    pub fn replay(&self, terms: &[Elem]) -> Elem {
        let ring = self.set.ring();
        let (first, rest) = terms.split_first().expect("non-empty decomposition");
        rest.iter().fold(first.clone(), |acc, t| match self.op {
            TraceOp::Sum => ring.add(&acc, t),
            TraceOp::Product => ring.mul(&acc, t),
        })
    }
}

/// Traced `mA`.
pub fn traced_iter_sumset(m: usize, a: &ElemSet) -> Result<TraceSet> {
    TraceSet::build(TraceOp::Sum, m, a)
}

/// Traced `A^m`.
pub fn traced_iter_productset(m: usize, a: &ElemSet) -> Result<TraceSet> {
    TraceSet::build(TraceOp::Product, m, a)
}
