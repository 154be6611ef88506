//! Structured matrices whose determinants are prescribed expressions.
//!
//! * [`build_m0`]: a nonsingular matrix with entries in `{a, b}`.
//! * [`block_double`]: `[[M0, M1], [M0, M2]]`, whose determinant is
//!   `det(M0) * det(M2 - M1)`. This lifts a matrix over `A - A` to one over `A`.
//! * [`build_gadget`]: for an `m x n` assignment `a`, a matrix of size
//!   `m(n-1)+1` with determinant `(-1)^(n+1) * sum_i prod_j a[i][j]`, using
//!   only the assignment entries, `0` and `1`.
//! * [`build_combined`]: several gadgets sharing one corner row and column.
//! * [`WitnessSynthesizer`]: given a target in `m A^n`, decodes one
//!   decomposition and returns the gadget realizing it.
//! * [`coverage_certificate`]: the smallest block-doubled construction
//!   whose determinants cover all of `F_p`, with a witness per element.
//!
//! Every [`GadgetWitness`] re-checks its determinant when it is built.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{block2x2, elem_to_json, sub, Matrix};
use crate::ring::{Elem, Ring};
use crate::setalg::{
    dilate, normalize_symmetric, productset, sumset, traced_iter_productset, traced_iter_sumset,
    ElemSet, TraceSet,
};

/// An `m x n` array `a[i][j]`; row `i` holds the factors of the `i`-th product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    m: usize,
    n: usize,
    entries: Vec<Elem>,
}

impl Assignment {
    pub fn new(m: usize, n: usize, rows: Vec<Vec<Elem>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::ShapeMismatch(format!("assignment must be at least 1x1, got {m}x{n}")));
        }
        if rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("rows do not form a {m}x{n} array")));
        }
        Ok(Assignment { m, n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        Self::new(m, n, rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row `i` (0-based); `row(i)[j]` is `a[i+1][j+1]`.
    pub fn row(&self, i: usize) -> &[Elem] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }

    /// `sum_i prod_j a[i][j]` in `ring`.
    pub fn sum_of_products(&self, ring: Ring) -> Elem {
        (0..self.m).fold(ring.zero(), |acc, i| {
            let prod = self.row(i).iter().fold(ring.one(), |p, x| ring.mul(&p, x));
            ring.add(&acc, &prod)
        })
    }

    /// Same products with a trailing factor `fill` appended to every row.
    fn widened(&self, fill: &Elem) -> Assignment {
        let rows = self
            .rows()
            .into_iter()
            .map(|mut r| {
                r.push(fill.clone());
                r
            })
            .collect();
        Assignment::new(self.m, self.n + 1, rows).expect("shape preserved")
    }
}

/// A matrix together with the value its determinant is certified to take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetWitness {
    matrix: Matrix,
    value: Elem,
    assignment: Vec<Vec<Elem>>,
    scale: Elem,
    allowed: Option<ElemSet>,
}

impl GadgetWitness {
    /// Fails unless `det(matrix) == value` and, when `allowed` is given,
    /// every entry of the matrix lies in it.
    pub fn new(
        matrix: Matrix,
        value: Elem,
        assignment: Vec<Vec<Elem>>,
        scale: Elem,
        allowed: Option<ElemSet>,
    ) -> Result<Self> {
        let ring = matrix.ring();
        let value = ring.reduce(&value);
        let det = matrix.det()?;
        if det != value {
            return Err(Error::Verification(format!("determinant {det} differs from claimed value {value}")));
        }
        if let Some(allowed) = &allowed {
            if allowed.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if let Some(bad) = matrix.entries().iter().find(|x| !allowed.contains(x)) {
                return Err(Error::Verification(format!("entry {bad} lies outside {allowed}")));
            }
        }
        Ok(GadgetWitness { matrix, value, assignment, scale: ring.reduce(&scale), allowed })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn value(&self) -> &Elem {
        &self.value
    }

    pub fn assignment(&self) -> &[Vec<Elem>] {
        &self.assignment
    }

    pub fn scale(&self) -> &Elem {
        &self.scale
    }

    pub fn allowed(&self) -> Option<&ElemSet> {
        self.allowed.as_ref()
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    fn restricted_to(self, allowed: &ElemSet) -> Result<Self> {
        Self::new(self.matrix, self.value, self.assignment, self.scale, Some(allowed.clone()))
    }

    /// `{"size": k, "value": v, "scale": s, "matrix": <matrix JSON>, "assignment": [[...]]}`.
    pub fn to_json(&self) -> Value {
        let assignment: Vec<Value> = self
            .assignment
            .iter()
            .map(|r| Value::Array(r.iter().map(elem_to_json).collect()))
            .collect();
        json!({
            "size": self.size(),
            "value": elem_to_json(&self.value),
            "scale": elem_to_json(&self.scale),
            "matrix": self.matrix.to_json(),
            "assignment": assignment,
        })
    }
}

/// `n x n` matrix with first row all `b`, diagonal `b` and every other entry
/// `a`. Its determinant is `b (b - a)^(n-1)`, nonzero when `b != 0 != b - a`.
pub fn build_m0(ring: Ring, a: &Elem, b: &Elem, n: usize) -> Result<Matrix> {
    let (a, b) = (ring.reduce(a), ring.reduce(b));
    if b.is_zero() || a == b {
        return Err(Error::BadPivotPair { a, b });
    }
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == 0 || i == j { b.clone() } else { a.clone() }
        })
        .collect();
    let m = Matrix::new(ring, n, n, entries)?;
    let expect = ring.mul(&b, &ring.pow(&ring.sub(&b, &a), n as u64 - 1));
    let det = m.det()?;
    if det != expect {
        return Err(Error::Verification(format!("det(M0) = {det}, expected {expect}")));
    }
    Ok(m)
}

/// `[[m0, m1], [m0, m2]]` with certified value `det(m0) * det(m2 - m1)`.
pub fn block_double(m0: &Matrix, m1: &Matrix, m2: &Matrix) -> Result<GadgetWitness> {
    let ring = m0.ring();
    if m1.ring() != ring || m2.ring() != ring {
        return Err(Error::RingMismatch);
    }
    let n = m0.rows();
    if [m0, m1, m2].iter().any(|m| m.rows() != n || m.cols() != n) {
        return Err(Error::ShapeMismatch("block_double needs three n x n blocks".into()));
    }
    let d0 = m0.det()?;
    if d0.is_zero() {
        return Err(Error::SingularBlock);
    }
    let value = ring.mul(&d0, &sub(m2, m1)?.det()?);
    let matrix = block2x2(m0, m1, m0, m2)?;
    GadgetWitness::new(matrix, value, Vec::new(), d0, None)
}

/// The `(n-1) x (n-1)` upper bidiagonal block for one assignment row: ones on
/// the diagonal and `a[i][n-1], a[i][n-2], ..., a[i][2]` down the superdiagonal.
pub fn build_bidiagonal(ring: Ring, row: &[Elem]) -> Result<Matrix> {
    let n = row.len();
    if n < 2 {
        return Err(Error::ShapeMismatch("bidiagonal block needs n >= 2".into()));
    }
    let mut m = Matrix::identity(ring, n - 1)?;
    place_bidiagonal(&mut m, 0, row, &ring.one());
    Ok(m)
}

fn place_bidiagonal(m: &mut Matrix, at: usize, row: &[Elem], unit: &Elem) {
    let s = row.len() - 1;
    for r in 0..s {
        m.set(at + r, at + r, unit.clone());
        if r + 1 < s {
            // 0-based row[n-2-r] is a[i][n-1-r].
            m.set(at + r, at + r + 1, row[s - 1 - r].clone());
        }
    }
}

/// Places the block for one assignment row (`n >= 2`) starting at
/// row/column `at`: `a[i][n]` on the top row, `a[i][1]` in the first column
/// on the block's last row.
fn place_row(m: &mut Matrix, at: usize, row: &[Elem], unit: &Elem) {
    let s = row.len() - 1;
    m.set(0, at, row[s].clone());
    m.set(at + s - 1, 0, row[0].clone());
    place_bidiagonal(m, at, row, unit);
}

/// Matrix size used for an `m x n` assignment. For `n = 1, m > 1` the sums
/// are realized by the `n = 2` layout with second factors `1`.
pub fn gadget_size(m: usize, n: usize) -> usize {
    match (m, n) {
        (1, 1) => 1,
        (m, 1) => m + 1,
        (m, n) => m * (n - 1) + 1,
    }
}

/// Global sign of a gadget's determinant relative to `sum prod a`.
pub fn gadget_sign(ring: Ring, n: usize) -> Elem {
    if n == 1 {
        ring.one()
    } else {
        ring.sign(n as u64 + 1)
    }
}

/// The gadget for `asg`, with certified value `(-1)^(n+1) sum_i prod_j a[i][j]`
/// (`+sum_i a[i][1]` when `n = 1`).
pub fn build_gadget(ring: Ring, asg: &Assignment) -> Result<GadgetWitness> {
    build_gadget_scaled(ring, asg, &ring.one())
}

/// [`build_gadget`] with every structural `1` replaced by `unit`. The value
/// becomes `sign * unit^(k-n) * sum prod a` for matrix size `k`, which is the
/// determinant of `unit` times the unit gadget over the entries `a / unit`.
pub fn build_gadget_scaled(ring: Ring, asg: &Assignment, unit: &Elem) -> Result<GadgetWitness> {
    let (m, n) = (asg.m, asg.n);
    let unit = ring.reduce(unit);
    let k = gadget_size(m, n);
    let sop = asg.sum_of_products(ring);
    let power = ring.pow(&unit, (k - n) as u64);
    let value = ring.mul(&gadget_sign(ring, n), &ring.mul(&power, &sop));

    let matrix = if k == 1 {
        Matrix::new(ring, 1, 1, vec![asg.row(0)[0].clone()])?
    } else {
        let layout = if n == 1 { asg.widened(&unit) } else { asg.clone() };
        let s = layout.n - 1;
        let mut mat = Matrix::zeros(ring, k, k)?;
        for i in 0..m {
            place_row(&mut mat, 1 + i * s, layout.row(i), &unit);
        }
        if n == 1 {
            // The n = 2 layout has sign -1; one row exchange restores +1.
            mat.swap_rows(0, 1);
        }
        mat
    };
    GadgetWitness::new(matrix, value, asg.rows(), power, None)
}

/// Several gadgets sharing the corner row and column, of size
/// `sum_j m_j (n_j - 1) + 1`. The value is `sum_j (-1)^(n_j+1) sum prod a_j`;
/// parts with `n_j = 1` are widened with a factor `1` and contribute with sign `-1`.
pub fn build_combined(ring: Ring, parts: &[Assignment]) -> Result<GadgetWitness> {
    match parts {
        [] => return Err(Error::ShapeMismatch("no parts".into())),
        [single] => return build_gadget(ring, single),
        _ => {}
    }
    let one = ring.one();
    let layouts: Vec<Assignment> =
        parts.iter().map(|p| if p.n == 1 { p.widened(&one) } else { p.clone() }).collect();
    let k = 1 + layouts.iter().map(|p| p.m * (p.n - 1)).sum::<usize>();
    let mut mat = Matrix::zeros(ring, k, k)?;
    let mut at = 1;
    let mut value = ring.zero();
    let mut rows = Vec::new();
    for p in &layouts {
        for i in 0..p.m {
            place_row(&mut mat, at, p.row(i), &one);
            at += p.n - 1;
        }
        let part = ring.mul(&ring.sign(p.n as u64 + 1), &p.sum_of_products(ring));
        value = ring.add(&value, &part);
        rows.extend(p.rows());
    }
    GadgetWitness::new(mat, value, rows, one, None)
}

/// Decodes targets in `sign * m A^n` into gadget witnesses whose entries
/// all lie in `A`. Requires `{0, 1} ⊆ A`.
#[derive(Clone, Debug)]
pub struct WitnessSynthesizer {
    allowed: ElemSet,
    m: usize,
    n: usize,
    products: TraceSet,
    sums: TraceSet,
    sign: Elem,
}

impl WitnessSynthesizer {
    pub fn new(a: &ElemSet, m: usize, n: usize) -> Result<Self> {
        let ring = a.ring();
        if !a.contains(&ring.zero()) || !a.contains(&ring.one()) {
            return Err(Error::MissingZeroOne);
        }
        if m == 0 || n == 0 {
            return Err(Error::ShapeMismatch(format!("m and n must be positive, got m={m}, n={n}")));
        }
        let products = traced_iter_productset(n, a)?;
        let sums = traced_iter_sumset(m, products.set())?;
        Ok(WitnessSynthesizer { allowed: a.clone(), m, n, products, sums, sign: gadget_sign(ring, n) })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix_size(&self) -> usize {
        gadget_size(self.m, self.n)
    }

    /// The untraced sum set `m A^n`.
    pub fn sums(&self) -> &ElemSet {
        self.sums.set()
    }

    /// All values this synthesizer can realize: `sign * m A^n`.
    pub fn realizable(&self) -> ElemSet {
        dilate(&self.sign, self.sums.set())
    }

    pub fn synthesize(&self, target: &Elem) -> Result<GadgetWitness> {
        let ring = self.allowed.ring();
        let target = ring.reduce(target);
        let wanted = ring.mul(&self.sign, &target);
        let terms = self.sums.decompose(&wanted).ok_or_else(|| Error::NotAMember(target.clone()))?;
        let rows = terms
            .iter()
            .map(|t| self.products.decompose(t).expect("every summand lies in A^n"))
            .collect();
        let asg = Assignment::new(self.m, self.n, rows)?;
        let w = build_gadget(ring, &asg)?;
        if w.value != target {
            return Err(Error::Verification(format!("synthesized {} instead of {target}", w.value)));
        }
        w.restricted_to(&self.allowed)
    }
}

/// One-shot form of [`WitnessSynthesizer::synthesize`].
pub fn synthesize_witness(a: &ElemSet, m: usize, n: usize, target: &Elem) -> Result<GadgetWitness> {
    WitnessSynthesizer::new(a, m, n)?.synthesize(target)
}

/// Lifts a square matrix `d` over `A - A` to a matrix over `A` twice its
/// size: `M0` is [`build_m0`] on the two least elements of `A`, and `M1`,
/// `M2` satisfy `M2 - M1 = d`. The value is `det(M0) * det(d)`.
#[derive(Clone, Debug)]
pub struct DifferenceLift {
    allowed: ElemSet,
    pivot: (Elem, Elem),
    pairs: HashMap<Elem, (Elem, Elem)>,
}

impl DifferenceLift {
    pub fn new(a: &ElemSet) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::SetTooSmall(a.len()));
        }
        let ring = a.ring();
        let elems = a.to_vec();
        let b = elems.iter().find(|x| !x.is_zero()).expect("|A| >= 2").clone();
        let x = elems.iter().find(|&x| *x != b).expect("|A| >= 2").clone();
        let mut pairs = HashMap::new();
        for hi in &elems {
            for lo in &elems {
                pairs.entry(ring.sub(hi, lo)).or_insert_with(|| (hi.clone(), lo.clone()));
            }
        }
        Ok(DifferenceLift { allowed: a.clone(), pivot: (x, b), pairs })
    }

    /// `(a, b)` used for `M0`.
    pub fn pivot_pair(&self) -> (&Elem, &Elem) {
        (&self.pivot.0, &self.pivot.1)
    }

    /// `det(M0)` for blocks of size `k`: `b (b - a)^(k-1)`.
    pub fn corner_det(&self, k: usize) -> Elem {
        let ring = self.allowed.ring();
        let (a, b) = &self.pivot;
        ring.mul(b, &ring.pow(&ring.sub(b, a), k as u64 - 1))
    }

    pub fn lift(&self, d: &Matrix) -> Result<GadgetWitness> {
        let ring = self.allowed.ring();
        if d.ring() != ring {
            return Err(Error::RingMismatch);
        }
        let k = d.rows();
        let mut hi = Vec::with_capacity(k * k);
        let mut lo = Vec::with_capacity(k * k);
        for x in d.entries() {
            let (h, l) = self
                .pairs
                .get(x)
                .ok_or_else(|| Error::Verification(format!("entry {x} is not a difference of elements of A")))?;
            hi.push(h.clone());
            lo.push(l.clone());
        }
        let m0 = build_m0(ring, &self.pivot.0, &self.pivot.1, k)?;
        let m1 = Matrix::new(ring, k, d.cols(), lo)?;
        let m2 = Matrix::new(ring, k, d.cols(), hi)?;
        block_double(&m0, &m1, &m2)?.restricted_to(&self.allowed)
    }
}

#[derive(Clone, Debug)]
enum Route {
    /// `A = F_p`: every element is a 1x1 determinant.
    Direct,
    /// Gadget over `A' = a0^{-1} (A - A)`, scaled by `a0` and block-doubled.
    Doubled { a0: Elem, det_m0: Elem, synth: Box<WitnessSynthesizer>, lift: Box<DifferenceLift> },
}

/// Constructive proof that `D_k(A) = F_p` for the reported size `k`.
#[derive(Clone, Debug)]
pub struct CoverageCertificate {
    set: ElemSet,
    size: usize,
    m: usize,
    n: usize,
    route: Route,
}

impl CoverageCertificate {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&self) -> &ElemSet {
        &self.set
    }

    /// Inner gadget size (half of [`size`](Self::size) for the doubled route).
    pub fn inner_size(&self) -> usize {
        match self.route {
            Route::Direct => 1,
            Route::Doubled { .. } => self.size / 2,
        }
    }

    /// `(det(M0), a0^k)`; both `1` for the direct route.
    pub fn scale_chain(&self) -> (Elem, Elem) {
        let ring = self.set.ring();
        match &self.route {
            Route::Direct => (ring.one(), ring.one()),
            Route::Doubled { a0, det_m0, .. } => (det_m0.clone(), ring.pow(a0, self.inner_size() as u64)),
        }
    }

    pub fn a0(&self) -> Option<&Elem> {
        match &self.route {
            Route::Direct => None,
            Route::Doubled { a0, .. } => Some(a0),
        }
    }

    pub fn normalized_set(&self) -> Option<&ElemSet> {
        match &self.route {
            Route::Direct => None,
            Route::Doubled { synth, .. } => Some(&synth.allowed),
        }
    }

    /// A matrix over `A` of size [`size`](Self::size) with determinant `t`.
    pub fn witness(&self, t: &Elem) -> Result<GadgetWitness> {
        let ring = self.set.ring();
        let t = ring.reduce(t);
        match &self.route {
            Route::Direct => {
                let m = Matrix::new(ring, 1, 1, vec![t.clone()])?;
                GadgetWitness::new(m, t.clone(), vec![vec![t]], ring.one(), Some(self.set.clone()))
            }
            Route::Doubled { a0, synth, lift, .. } => {
                let (det_m0, a0k) = self.scale_chain();
                let scale = ring.mul(&det_m0, &a0k);
                let inner = ring.div_exact(&t, &scale).expect("nonzero scale over a field");
                let w = synth.synthesize(&inner)?;
                let lifted = lift.lift(&w.matrix.scale(a0))?;
                if lifted.value != t {
                    return Err(Error::Verification(format!("lifted witness has value {}", lifted.value)));
                }
                GadgetWitness::new(lifted.matrix, t, w.assignment, scale, Some(self.set.clone()))
            }
        }
    }

    /// One verified witness per field element, in ascending order.
    pub fn witnesses(&self) -> Result<Vec<GadgetWitness>> {
        let p = self.set.ring().modulus().expect("certificates live over F_p");
        (0..p).into_par_iter().map(|t| self.witness(&BigInt::from(t))).collect()
    }

    pub fn to_json(&self) -> Value {
        let (det_m0, a0k) = self.scale_chain();
        json!({
            "p": self.set.ring().modulus(),
            "set": self.set.iter().map(|x| elem_to_json(&x)).collect::<Vec<_>>(),
            "size": self.size,
            "m": self.m,
            "n": self.n,
            "inner_size": self.inner_size(),
            "a0": self.a0().map(elem_to_json),
            "scale_chain": {"det_m0": elem_to_json(&det_m0), "a0_pow": elem_to_json(&a0k)},
        })
    }
}

/// Smallest block-doubled gadget construction, of total size at most
/// `budget`, whose determinants over `A` cover `F_p`. Ties on size go to the
/// smaller `n`. If `A` already is `F_p` the certificate has size 1.
pub fn coverage_certificate(a: &ElemSet, budget: usize) -> Result<CoverageCertificate> {
    let ring = a.ring();
    if !ring.is_field() {
        return Err(Error::InvalidArgument("coverage certificates need a prime field".into()));
    }
    if a.len() < 2 {
        return Err(Error::SetTooSmall(a.len()));
    }
    if a.is_full_field() && budget >= 1 {
        return Ok(CoverageCertificate { set: a.clone(), size: 1, m: 1, n: 1, route: Route::Direct });
    }
    let max_inner = budget / 2;
    if max_inner == 0 {
        return Err(Error::Insufficient(budget));
    }
    let (normalized, a0) = normalize_symmetric(a)?;

    // best = (inner size, n, m)
    let mut best: Option<(usize, usize, usize)> = None;
    let mut power = normalized.clone();
    for n in 1..=max_inner {
        if best.is_some_and(|(k, _, _)| n > k) {
            break;
        }
        if n > 1 {
            power = productset(&power, &normalized)?;
        }
        if n == 1 {
            // Sums of n = 1 products are dominated by n = 2 at equal size.
            if power.is_full_field() {
                best = Some((1, 1, 1));
            }
            continue;
        }
        let max_m = (max_inner - 1) / (n - 1);
        let mut sums = power.clone();
        for m in 1..=max_m {
            if sums.is_full_field() {
                let k = m * (n - 1) + 1;
                if best.is_none_or(|(bk, _, _)| k < bk) {
                    best = Some((k, n, m));
                }
                break;
            }
            sums = sumset(&sums, &power)?;
        }
    }
    let (k, n, m) = best.ok_or(Error::Insufficient(budget))?;
    let synth = WitnessSynthesizer::new(&normalized, m, n)?;
    debug_assert!(synth.realizable().is_full_field());
    let lift = DifferenceLift::new(a)?;
    let det_m0 = lift.corner_det(k);
    Ok(CoverageCertificate {
        set: a.clone(),
        size: 2 * k,
        m,
        n,
        route: Route::Doubled { a0, det_m0, synth: Box::new(synth), lift: Box::new(lift) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::signum;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z() -> Ring {
        Ring::integers()
    }

    fn fp(p: u64) -> Ring {
        Ring::prime_field(p).unwrap()
    }

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn to_i64(x: &Elem) -> i64 {
        x.to_i64().unwrap()
    }

    fn random_assignment(ring: Ring, m: usize, n: usize, rng: &mut ChaCha8Rng) -> Assignment {
        let rows = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| match ring.modulus() {
                        Some(p) => b(rng.gen_range(0..p as i64)),
                        None => b(rng.gen_range(-9..=9)),
                    })
                    .collect()
            })
            .collect();
        Assignment::new(m, n, rows).unwrap()
    }

    #[test]
    fn m0_examples() {
        let m = build_m0(z(), &b(0), &b(1), 2).unwrap();
        assert_eq!(m, Matrix::from_i64_rows(z(), &[vec![1, 1], vec![0, 1]]).unwrap());
        assert_eq!(m.det().unwrap(), b(1));
        let m = build_m0(z(), &b(2), &b(3), 3).unwrap();
        assert_eq!(m.det_oracle().unwrap(), b(3));
        assert!(matches!(build_m0(z(), &b(1), &b(1), 3), Err(Error::BadPivotPair { .. })));
        assert!(matches!(build_m0(z(), &b(1), &b(0), 3), Err(Error::BadPivotPair { .. })));
    }

    #[test]
    fn m0_formula_against_oracle() {
        for ring in [fp(2), fp(3), fp(5), fp(7), fp(101), z()] {
            let vals: Vec<i64> = match ring.modulus() {
                Some(p) => (0..p.min(7) as i64).collect(),
                None => (-3..=3).collect(),
            };
            for &a in &vals {
                for &bb in &vals {
                    if bb == 0 || a == bb {
                        continue;
                    }
                    for n in 1..=6 {
                        let m = build_m0(ring, &b(a), &b(bb), n).unwrap();
                        let expect = ring.mul(&b(bb), &ring.pow(&ring.sub(&b(bb), &b(a)), n as u64 - 1));
                        assert_eq!(m.det_oracle().unwrap(), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn block_double_examples() {
        let r = z();
        let m0 = Matrix::from_i64_rows(r, &[vec![1]]).unwrap();
        let m1 = Matrix::from_i64_rows(r, &[vec![0]]).unwrap();
        let m2 = Matrix::from_i64_rows(r, &[vec![7]]).unwrap();
        let w = block_double(&m0, &m1, &m2).unwrap();
        assert_eq!(w.size(), 2);
        assert_eq!(w.value(), &b(7));
        assert!(block_double(&m0, &m2, &m2).unwrap().value().is_zero());

        let f7 = fp(7);
        let m0 = build_m0(f7, &b(0), &b(1), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let rand2 = |rng: &mut ChaCha8Rng| {
                Matrix::new(f7, 2, 2, (0..4).map(|_| b(rng.gen_range(0..7))).collect()).unwrap()
            };
            let (m1, m2) = (rand2(&mut rng), rand2(&mut rng));
            let w = block_double(&m0, &m1, &m2).unwrap();
            assert_eq!(w.value(), &sub(&m2, &m1).unwrap().det().unwrap());
            assert_eq!(&w.matrix().det_oracle().unwrap(), w.value());
        }
        let singular = Matrix::zeros(r, 1, 1).unwrap();
        assert_eq!(block_double(&singular, &singular, &singular), Err(Error::SingularBlock));
    }

    #[test]
    fn bidiagonal_examples() {
        let r = z();
        assert_eq!(build_bidiagonal(r, &[b(5), b(6)]).unwrap(), Matrix::identity(r, 1).unwrap());
        let m = build_bidiagonal(r, &[b(5), b(6), b(7)]).unwrap();
        assert_eq!(m, Matrix::from_i64_rows(r, &[vec![1, 6], vec![0, 1]]).unwrap());
        // superdiagonal runs a[i][n-1] .. a[i][2] from the top
        let m = build_bidiagonal(r, &[b(1), b(2), b(3), b(4), b(5)]).unwrap();
        assert_eq!(m.get(0, 1), &b(4));
        assert_eq!(m.get(1, 2), &b(3));
        assert_eq!(m.get(2, 3), &b(2));
        assert_eq!(m.det().unwrap(), b(1));
        assert!(build_bidiagonal(r, &[b(1)]).is_err());
    }

    #[test]
    fn gadget_matches_displayed_layouts() {
        let r = z();
        // n = 2, m = 3 with a_i = (a_i, b_i)
        let asg = Assignment::from_i64_rows(&[vec![2, 3], vec![5, 7], vec![11, 13]]).unwrap();
        let w = build_gadget(r, &asg).unwrap();
        let expect = Matrix::from_i64_rows(
            r,
            &[vec![0, 3, 7, 13], vec![2, 1, 0, 0], vec![5, 0, 1, 0], vec![11, 0, 0, 1]],
        )
        .unwrap();
        assert_eq!(w.matrix(), &expect);
        assert_eq!(w.value(), &b(-(2 * 3 + 5 * 7 + 11 * 13)));

        // n = 3 all ones: +3
        let ones = Assignment::from_i64_rows(&[vec![1; 3], vec![1; 3], vec![1; 3]]).unwrap();
        let w = build_gadget(r, &ones).unwrap();
        assert_eq!(w.size(), 7);
        assert_eq!(w.value(), &b(3));

        // n = 3 layout: c_i on the top row at columns 1, 3, 5; a_i in column 0 at rows 2, 4, 6
        let asg = Assignment::from_i64_rows(&[vec![2, 3, 4], vec![5, 6, 7], vec![8, 9, 10]]).unwrap();
        let m = build_gadget(r, &asg).unwrap();
        let mm = m.matrix();
        assert_eq!((mm.get(0, 1), mm.get(0, 3), mm.get(0, 5)), (&b(4), &b(7), &b(10)));
        assert_eq!((mm.get(2, 0), mm.get(4, 0), mm.get(6, 0)), (&b(2), &b(5), &b(8)));
        assert_eq!((mm.get(1, 2), mm.get(3, 4), mm.get(5, 6)), (&b(3), &b(6), &b(9)));

        // m = 1, n = 2
        let w = build_gadget(r, &Assignment::from_i64_rows(&[vec![4, 5]]).unwrap()).unwrap();
        assert_eq!(w.size(), 2);
        assert_eq!(w.matrix().det_oracle().unwrap(), b(-20));
    }

    #[test]
    fn gadget_n_equals_one() {
        let r = z();
        let w = build_gadget(r, &Assignment::from_i64_rows(&[vec![-4]]).unwrap()).unwrap();
        assert_eq!(w.size(), 1);
        assert_eq!(w.value(), &b(-4));
        let w = build_gadget(r, &Assignment::from_i64_rows(&[vec![2], vec![3], vec![4]]).unwrap()).unwrap();
        assert_eq!(w.size(), 4);
        assert_eq!(w.value(), &b(9));
        assert!(w.matrix().entries().iter().all(|x| [0, 1, 2, 3, 4].contains(&to_i64(x))));
    }

    #[test]
    fn gadget_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for ring in [z(), fp(2), fp(5), fp(101)] {
            for _ in 0..300 {
                let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
                let asg = random_assignment(ring, m, n, &mut rng);
                let w = build_gadget(ring, &asg).unwrap();
                let expect = ring.mul(&ring.sign(n as u64 + 1), &asg.sum_of_products(ring));
                assert_eq!(w.value(), &expect);
                assert_eq!(w.size(), gadget_size(m, n));
            }
        }
    }

    #[test]
    fn scaled_gadget_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for ring in [z(), fp(11)] {
            for _ in 0..200 {
                let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                let asg = random_assignment(ring, m, n, &mut rng);
                let u = ring.reduce(&b(rng.gen_range(1..=5)));
                let w = build_gadget_scaled(ring, &asg, &u).unwrap();
                let k = gadget_size(m, n);
                let expect = ring.mul(
                    &gadget_sign(ring, n),
                    &ring.mul(&ring.pow(&u, (k - n) as u64), &asg.sum_of_products(ring)),
                );
                assert_eq!(w.value(), &expect);
            }
        }
    }

    #[test]
    fn permanent_sign_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (m, n) in [(1, 1), (3, 1), (1, 2), (4, 2), (2, 3), (3, 4), (2, 7), (4, 4)] {
            let mut ratio = None;
            for _ in 0..30 {
                let asg = random_assignment(z(), m, n, &mut rng);
                let w = build_gadget(z(), &asg).unwrap();
                let perm = w.matrix().permanent().unwrap();
                assert_eq!(perm, asg.sum_of_products(z()));
                let d = w.value();
                if !d.is_zero() {
                    let s = signum(&perm) * signum(d);
                    assert_eq!(*ratio.get_or_insert(s), s);
                }
            }
        }
    }

    #[test]
    fn combined_examples() {
        let r = z();
        let single = Assignment::from_i64_rows(&[vec![2, 3], vec![4, 5]]).unwrap();
        assert_eq!(build_combined(r, std::slice::from_ref(&single)).unwrap(), build_gadget(r, &single).unwrap());

        let p1 = Assignment::from_i64_rows(&[vec![2, 3]]).unwrap();
        let p2 = Assignment::from_i64_rows(&[vec![5, 7]]).unwrap();
        let w = build_combined(r, &[p1, p2]).unwrap();
        assert_eq!(w.size(), 3);
        assert_eq!(w.value(), &b(-6 - 35));
        assert_eq!(&w.matrix().det_oracle().unwrap(), w.value());

        let zeros = [Assignment::from_i64_rows(&[vec![0, 0, 0]]).unwrap(), Assignment::from_i64_rows(&[vec![0, 0]]).unwrap()];
        assert!(build_combined(r, &zeros).unwrap().value().is_zero());
        assert!(build_combined(r, &[]).is_err());
    }

    #[test]
    fn combined_random_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for ring in [z(), fp(7)] {
            for _ in 0..100 {
                let parts: Vec<Assignment> = (0..rng.gen_range(2..=3))
                    .map(|_| {
                        let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=4));
                        random_assignment(ring, m, n, &mut rng)
                    })
                    .collect();
                let w = build_combined(ring, &parts).unwrap();
                let k = 1 + parts.iter().map(|p| p.m() * (p.n().max(2) - 1)).sum::<usize>();
                assert_eq!(w.size(), k);
            }
        }
    }

    #[test]
    fn synthesize_examples() {
        let r = z();
        let a = ElemSet::from_i64s(r, &[0, 1]);
        let w = synthesize_witness(&a, 3, 2, &b(-2)).unwrap();
        assert_eq!(w.size(), 4);
        assert_eq!(w.matrix().det_oracle().unwrap(), b(-2));
        let ones = w.assignment().iter().filter(|row| row.iter().all(|x| to_i64(x) == 1)).count();
        assert_eq!(ones, 2);
        assert_eq!(synthesize_witness(&a, 3, 2, &b(5)), Err(Error::NotAMember(b(5))));
        assert_eq!(
            synthesize_witness(&ElemSet::from_i64s(r, &[1, 2]), 2, 2, &b(1)).unwrap_err(),
            Error::MissingZeroOne
        );
    }

    #[test]
    fn synthesize_sound_and_complete_small() {
        let rings = [fp(5), fp(7), z()];
        for ring in rings {
            let pool: Vec<i64> = match ring.modulus() {
                Some(p) => (2..p as i64).collect(),
                None => vec![-2, -1, 2, 3],
            };
            // A = {0, 1} plus at most one extra element
            let mut sets = vec![vec![0, 1]];
            sets.extend(pool.iter().map(|&x| vec![0, 1, x]));
            for elems in sets {
                let a = ElemSet::from_i64s(ring, &elems);
                for m in 1..=3 {
                    for n in 1..=3 {
                        let synth = WitnessSynthesizer::new(&a, m, n).unwrap();
                        let realizable = synth.realizable();
                        let candidates: Vec<Elem> = match ring.modulus() {
                            Some(p) => (0..p as i64).map(BigInt::from).collect(),
                            None => (-30..=30).map(BigInt::from).collect(),
                        };
                        for t in candidates {
                            match synth.synthesize(&t) {
                                Ok(w) => {
                                    assert!(realizable.contains(&t));
                                    assert_eq!(w.matrix().det().unwrap(), ring.reduce(&t));
                                    assert!(w.matrix().entries().iter().all(|x| a.contains(x)));
                                }
                                Err(Error::NotAMember(_)) => assert!(!realizable.contains(&t)),
                                Err(e) => panic!("{e}"),
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coverage_examples() {
        let f5 = fp(5);
        let a = ElemSet::from_i64s(f5, &[0, 1]);
        let cert = coverage_certificate(&a, 64).unwrap();
        assert_eq!(cert.normalized_set().unwrap(), &ElemSet::from_i64s(f5, &[0, 1, 4]));
        assert_eq!((cert.m(), cert.n(), cert.size()), (2, 2, 6));
        let ws = cert.witnesses().unwrap();
        assert_eq!(ws.len(), 5);
        for (t, w) in ws.iter().enumerate() {
            assert_eq!(w.matrix().det().unwrap(), b(t as i64));
            assert_eq!(w.size(), 6);
            assert!(w.matrix().entries().iter().all(|x| a.contains(x)));
        }
        assert!(matches!(coverage_certificate(&a, 2), Err(Error::Insufficient(2))));

        let f2 = fp(2);
        let cert = coverage_certificate(&ElemSet::from_i64s(f2, &[0, 1]), 8).unwrap();
        assert_eq!((cert.size(), cert.n()), (1, 1));
        assert_eq!(cert.witnesses().unwrap().len(), 2);

        assert_eq!(
            coverage_certificate(&ElemSet::from_i64s(f5, &[2]), 10).unwrap_err(),
            Error::SetTooSmall(1)
        );
    }

    #[test]
    fn difference_lift_values() {
        let r = z();
        let a = ElemSet::from_i64s(r, &[-1, 2, 5]);
        let lift = DifferenceLift::new(&a).unwrap();
        let d = Matrix::from_i64_rows(r, &[vec![3, -6], vec![0, 3]]).unwrap();
        let w = lift.lift(&d).unwrap();
        assert_eq!(w.size(), 4);
        assert_eq!(w.value(), &(lift.corner_det(2) * b(9)));
        let bad = Matrix::from_i64_rows(r, &[vec![1]]).unwrap();
        assert!(lift.lift(&bad).is_err());
    }
}
