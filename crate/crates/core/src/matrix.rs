//! Dense matrices over a [`Ring`] with exact determinants and permanents.
//!
//! Determinants over `F_p` use Gaussian elimination with modular inverses.
//! Over the integers they use Bareiss fraction-free elimination, first in
//! checked `i128` and, on overflow, again in arbitrary precision. Every
//! Bareiss division is exact, so no intermediate is ever a fraction.
//!
//! Permanents use Ryser's inclusion-exclusion formula with a Gray-code walk
//! over column subsets. Both quantities have a permutation-expansion oracle
//! for small sizes that shares no code with the fast paths.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{add_mod, inv_mod_u64, mul_mod, sub_mod, Elem, Ring};

/// Largest size accepted by the permutation-expansion oracles.
pub const ORACLE_MAX: usize = 8;
/// Largest size accepted by [`Matrix::permanent`].
pub const PERMANENT_MAX: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    entries: Vec<Elem>,
}

impl Matrix {
    /// Row-major constructor; entries are reduced into the ring.
    pub fn new(ring: Ring, rows: usize, cols: usize, entries: Vec<Elem>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch(format!("{rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let entries = entries.iter().map(|x| ring.reduce(x)).collect();
        Ok(Matrix { ring, rows, cols, entries })
    }

    pub fn from_rows(ring: Ring, rows: Vec<Vec<Elem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(ring, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(ring: Ring, rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            ring,
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(),
        )
    }

    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Result<Self> {
        Self::new(ring, rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(ring: Ring, n: usize) -> Result<Self> {
        let mut m = Self::zeros(ring, n, n)?;
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        Ok(m)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.entries[i * self.cols + j] = self.ring.reduce(&x);
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        Matrix { ring: self.ring, rows: self.cols, cols: self.rows, entries }
    }

    /// Entrywise product with a scalar.
    pub fn scale(&self, c: &Elem) -> Matrix {
        let entries = self.entries.iter().map(|x| self.ring.mul(x, c)).collect();
        Matrix { entries, ..self.clone() }
    }

    fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.rows)
    }

    fn small_residues(&self) -> Option<Vec<u64>> {
        self.ring.modulus()?;
        self.entries.iter().map(ToPrimitive::to_u64).collect()
    }

    fn small_ints(&self) -> Option<Vec<i128>> {
        self.entries.iter().map(|x| x.to_i64().map(i128::from)).collect()
    }

    /// Exact determinant.
    pub fn det(&self) -> Result<Elem> {
        let n = self.require_square()?;
        if let Some(p) = self.ring.modulus() {
            let mut a = self.small_residues().expect("canonical residues fit u64");
            return Ok(BigInt::from(det_mod_p(&mut a, n, p)));
        }
        if let Some(mut a) = self.small_ints() {
            if let Some(d) = det_bareiss_i128(&mut a, n) {
                return Ok(BigInt::from(d));
            }
        }
        let (d, inexact) = det_bareiss_big(self.entries.clone(), n);
        debug_assert_eq!(inexact, 0);
        Ok(d)
    }

    /// Determinant by full permutation expansion; at most [`ORACLE_MAX`] rows.
    pub fn det_oracle(&self) -> Result<Elem> {
        let n = self.require_square()?;
        if n > ORACLE_MAX {
            return Err(Error::TooLarge { what: "det_oracle", max: ORACLE_MAX, got: n });
        }
        let mut total = BigInt::zero();
        expand(self, 0, &mut vec![false; n], 0, BigInt::one(), &mut |sign_odd, prod| {
            if sign_odd {
                total -= prod;
            } else {
                total += prod;
            }
        });
        Ok(self.ring.reduce(&total))
    }

    /// Exact permanent by Ryser's formula; at most [`PERMANENT_MAX`] rows.
    pub fn permanent(&self) -> Result<Elem> {
        let n = self.require_square()?;
        if n > PERMANENT_MAX {
            return Err(Error::TooLarge { what: "permanent", max: PERMANENT_MAX, got: n });
        }
        if let Some(p) = self.ring.modulus() {
            let a = self.small_residues().expect("canonical residues fit u64");
            return Ok(BigInt::from(ryser_mod_p(&a, n, p)));
        }
        match self.small_ints() {
            Some(a) => Ok(ryser_int(&a, n)),
            None => Ok(ryser_big(&self.entries, n)),
        }
    }

    /// Permanent by full permutation expansion; at most [`ORACLE_MAX`] rows.
    pub fn permanent_oracle(&self) -> Result<Elem> {
        let n = self.require_square()?;
        if n > ORACLE_MAX {
            return Err(Error::TooLarge { what: "permanent_oracle", max: ORACLE_MAX, got: n });
        }
        let mut total = BigInt::zero();
        expand(self, 0, &mut vec![false; n], 0, BigInt::one(), &mut |_, prod| total += prod);
        Ok(self.ring.reduce(&total))
    }

    /// `{"p": modulus-or-null, "rows": r, "cols": c, "entries": [[...], ...]}`.
    /// Entries outside the `i64` range are written as decimal strings.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.rows)
            .map(|i| Value::Array(self.row(i).iter().map(elem_to_json).collect()))
            .collect();
        json!({
            "p": self.ring.modulus(),
            "rows": self.rows,
            "cols": self.cols,
            "entries": rows,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("matrix json: {what}"));
        let ring = match v.get("p") {
            None | Some(Value::Null) => Ring::integers(),
            Some(p) => Ring::prime_field(p.as_u64().ok_or_else(|| bad("p"))?)?,
        };
        let rows = v.get("rows").and_then(Value::as_u64).ok_or_else(|| bad("rows"))? as usize;
        let cols = v.get("cols").and_then(Value::as_u64).ok_or_else(|| bad("cols"))? as usize;
        let mut entries = Vec::with_capacity(rows * cols);
        for row in v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("entries"))? {
            let row = row.as_array().ok_or_else(|| bad("entries row"))?;
            if row.len() != cols {
                return Err(bad("row length"));
            }
            for x in row {
                entries.push(elem_from_json(x).ok_or_else(|| bad("entry"))?);
            }
        }
        Self::new(ring, rows, cols, entries)
    }
}

pub(crate) fn elem_to_json(x: &Elem) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(x.to_string()),
    }
}

pub(crate) fn elem_from_json(v: &Value) -> Option<Elem> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

// Row-by-row permutation expansion. Parity tracks inversions: picking column
// c after the columns in `used` adds one inversion per used column above c.
fn expand(
    m: &Matrix,
    row: usize,
    used: &mut [bool],
    inversions: usize,
    prod: BigInt,
    emit: &mut dyn FnMut(bool, BigInt),
) {
    let n = m.rows;
    if row == n {
        emit(inversions % 2 == 1, prod);
        return;
    }
    for c in 0..n {
        if used[c] || m.get(row, c).is_zero() {
            continue;
        }
        let above = used[c + 1..].iter().filter(|&&u| u).count();
        used[c] = true;
        expand(m, row + 1, used, inversions + above, &prod * m.get(row, c), emit);
        used[c] = false;
    }
}

/// `[[m00, m01], [m10, m11]]`.
pub fn block2x2(m00: &Matrix, m01: &Matrix, m10: &Matrix, m11: &Matrix) -> Result<Matrix> {
    let ring = m00.ring;
    if [m01, m10, m11].iter().any(|m| m.ring != ring) {
        return Err(Error::RingMismatch);
    }
    if m00.rows != m01.rows || m10.rows != m11.rows || m00.cols != m10.cols || m01.cols != m11.cols {
        return Err(Error::ShapeMismatch("blocks are not conformable".into()));
    }
    let (rows, cols) = (m00.rows + m10.rows, m00.cols + m01.cols);
    let mut entries = Vec::with_capacity(rows * cols);
    for (left, right) in [(m00, m01), (m10, m11)] {
        for i in 0..left.rows {
            entries.extend_from_slice(left.row(i));
            entries.extend_from_slice(right.row(i));
        }
    }
    Ok(Matrix { ring, rows, cols, entries })
}

/// Entrywise `m - n`.
pub fn sub(m: &Matrix, n: &Matrix) -> Result<Matrix> {
    if m.ring != n.ring {
        return Err(Error::RingMismatch);
    }
    if (m.rows, m.cols) != (n.rows, n.cols) {
        return Err(Error::ShapeMismatch("operands differ in shape".into()));
    }
    let entries = m.entries.iter().zip(&n.entries).map(|(x, y)| m.ring.sub(x, y)).collect();
    Ok(Matrix { entries, ..m.clone() })
}

/// Determinant of the row-major `n x n` residue matrix `a` (clobbered).
pub(crate) fn det_mod_p(a: &mut [u64], n: usize, p: u64) -> u64 {
    let mut det = 1u64;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&r| a[r * n + k] != 0) else {
            return 0;
        };
        if piv != k {
            for j in k..n {
                a.swap(piv * n + j, k * n + j);
            }
            det = sub_mod(0, det, p);
        }
        let pivot = a[k * n + k];
        det = mul_mod(det, pivot, p);
        let inv = inv_mod_u64(pivot, p);
        for i in k + 1..n {
            let f = mul_mod(a[i * n + k], inv, p);
            if f == 0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] = sub_mod(a[i * n + j], mul_mod(f, a[k * n + j], p), p);
            }
        }
    }
    det
}

/// Bareiss elimination in checked `i128`; `None` on overflow.
pub(crate) fn det_bareiss_i128(a: &mut [i128], n: usize) -> Option<i128> {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k] == 0 {
            let Some(piv) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                return Some(0);
            };
            for j in 0..n {
                a.swap(piv * n + j, k * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i * n + j]
                    .checked_mul(pivot)?
                    .checked_sub(a[i * n + k].checked_mul(a[k * n + j])?)?;
                debug_assert_eq!(v % prev, 0);
                a[i * n + j] = v / prev;
            }
            a[i * n + k] = 0;
        }
        prev = pivot;
    }
    sign.checked_mul(a[n * n - 1])
}

/// Bareiss elimination in arbitrary precision. Also returns how many
/// divisions left a remainder, which is zero for fraction-free elimination.
pub(crate) fn det_bareiss_big(mut a: Vec<BigInt>, n: usize) -> (BigInt, usize) {
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    let mut inexact = 0;
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            let Some(piv) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else {
                return (BigInt::zero(), inexact);
            };
            for j in 0..n {
                a.swap(piv * n + j, k * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i * n + j] * &pivot - &a[i * n + k] * &a[k * n + j];
                let (q, r) = v.div_rem(&prev);
                if !r.is_zero() {
                    inexact += 1;
                }
                a[i * n + j] = q;
            }
            a[i * n + k] = BigInt::zero();
        }
        prev = pivot;
    }
    (sign * &a[n * n - 1], inexact)
}

fn ryser_mod_p(a: &[u64], n: usize, p: u64) -> u64 {
    let mut sums = vec![0u64; n];
    let mut total = 0u64;
    let mut prev_gray = 0u64;
    for k in 1u64..1 << n {
        let gray = k ^ (k >> 1);
        let j = (gray ^ prev_gray).trailing_zeros() as usize;
        let adding = gray >> j & 1 == 1;
        for (i, s) in sums.iter_mut().enumerate() {
            *s = if adding { add_mod(*s, a[i * n + j], p) } else { sub_mod(*s, a[i * n + j], p) };
        }
        prev_gray = gray;
        let prod = sums.iter().fold(1u64, |acc, &s| mul_mod(acc, s, p));
        // Sign (-1)^(n - |S|).
        if (n as u32 - gray.count_ones()).is_multiple_of(2) {
            total = add_mod(total, prod, p);
        } else {
            total = sub_mod(total, prod, p);
        }
    }
    total
}

fn ryser_int(a: &[i128], n: usize) -> BigInt {
    let mut sums = vec![0i128; n];
    let mut small = 0i128;
    let mut spill = BigInt::zero();
    let mut prev_gray = 0u64;
    for k in 1u64..1 << n {
        let gray = k ^ (k >> 1);
        let j = (gray ^ prev_gray).trailing_zeros() as usize;
        let adding = gray >> j & 1 == 1;
        for (i, s) in sums.iter_mut().enumerate() {
            // Entries fit i64 and n <= 24, so row sums cannot overflow.
            if adding {
                *s += a[i * n + j];
            } else {
                *s -= a[i * n + j];
            }
        }
        prev_gray = gray;
        let negative = (n as u32 - gray.count_ones()) % 2 == 1;
        let prod = sums.iter().try_fold(1i128, |acc, &s| acc.checked_mul(s));
        match prod.and_then(|v| if negative { v.checked_neg() } else { Some(v) }) {
            Some(v) => match small.checked_add(v) {
                Some(t) => small = t,
                None => {
                    spill += small;
                    small = v;
                }
            },
            None => {
                let big: BigInt = sums.iter().map(|&s| BigInt::from(s)).product();
                if negative {
                    spill -= big;
                } else {
                    spill += big;
                }
            }
        }
    }
    spill + small
}

fn ryser_big(a: &[BigInt], n: usize) -> BigInt {
    let mut sums = vec![BigInt::zero(); n];
    let mut total = BigInt::zero();
    let mut prev_gray = 0u64;
    for k in 1u64..1 << n {
        let gray = k ^ (k >> 1);
        let j = (gray ^ prev_gray).trailing_zeros() as usize;
        let adding = gray >> j & 1 == 1;
        for (i, s) in sums.iter_mut().enumerate() {
            if adding {
                *s += &a[i * n + j];
            } else {
                *s -= &a[i * n + j];
            }
        }
        prev_gray = gray;
        let prod: BigInt = sums.iter().product();
        if (n as u32 - gray.count_ones()).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Sign of a nonzero integer-valued element, `0` for zero.
#[cfg(test)]
pub(crate) fn signum(x: &BigInt) -> i32 {
    use num_traits::Signed;
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}
