//! Dense linear algebra over GF(q).
//!
//! [`MatrixQ`] stores elements row-major; GF(2) elimination runs on
//! [`BitMatrix`], which packs each row into 64-bit words.
//! [`SubspaceIter`] walks every k-dimensional subspace of GF(q)^n once, by its
//! reduced row echelon basis.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

#[derive(Clone, PartialEq, Eq)]
pub struct MatrixQ {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl std::fmt::Debug for MatrixQ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} {}x{} ", self.field, self.rows, self.cols)?;
        f.debug_list().entries(self.row_iter()).finish()
    }
}

/// Result of [`MatrixQ::rref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    /// The reduced matrix with zero rows removed.
    pub matrix: MatrixQ,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Wire form: `{"q": int, "rows": [[int,...],...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub q: u32,
    pub rows: Vec<Vec<u32>>,
}

impl MatrixQ {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> MatrixQ {
        MatrixQ {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> MatrixQ {
        let mut m = MatrixQ::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from element rows. All rows must have length `cols` and every
    /// entry must lie in the field.
    pub fn from_rows<R: AsRef<[u32]>>(field: &Field, cols: usize, rows: &[R]) -> Result<MatrixQ> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            for &v in r {
                if !field.contains(v) {
                    return Err(Error::ElementOutOfRange {
                        value: v,
                        q: field.order(),
                    });
                }
                data.push(v as Elem);
            }
        }
        Ok(MatrixQ {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build from rows already known to be valid elements.
    pub fn from_elem_rows<R: AsRef<[Elem]>>(field: &Field, cols: usize, rows: &[R]) -> MatrixQ {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row length");
            debug_assert!(r.iter().all(|&x| field.contains(x as u32)));
            data.extend_from_slice(r);
        }
        MatrixQ {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_json(j: &MatrixJson, cols: usize) -> Result<MatrixQ> {
        let field = Field::new(j.q)?;
        MatrixQ::from_rows(&field, cols, &j.rows)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            q: self.field.order(),
            rows: self.row_vecs(),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Elem]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        self.row_iter()
            .map(|r| r.iter().map(|&x| x as u32).collect())
            .collect()
    }

    pub fn push_row(&mut self, row: &[Elem]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn transpose(&self) -> MatrixQ {
        let mut t = MatrixQ::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Reduced row echelon form. Zero rows are dropped, so the returned matrix
    /// has exactly `rank` rows.
    pub fn rref(&self) -> Rref {
        if self.field.order() == 2 {
            let mut bits = BitMatrix::from_matrix(self);
            let pivots = bits.rref();
            let matrix = bits.to_matrix(&self.field, pivots.len());
            return Rref {
                rank: pivots.len(),
                matrix,
                pivots,
            };
        }
        let mut m = self.clone();
        let pivots = eliminate(&self.field, &mut m.data, self.rows, self.cols, self.cols);
        m.data.truncate(pivots.len() * self.cols);
        m.rows = pivots.len();
        Rref {
            rank: pivots.len(),
            matrix: m,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// True iff `v` lies in the row space.
    pub fn in_span(&self, v: &[Elem]) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let r = self.rref();
        Ok(reduce_against(&self.field, &r.matrix, &r.pivots, v).iter().all(|&x| x == 0))
    }

    /// Coefficients `c` with `sum_r c[r] * row_r = v`, if any exist.
    pub fn express(&self, v: &[Elem]) -> Result<Option<Vec<Elem>>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let f = &self.field;
        let (rows, cols) = (self.rows, self.cols);
        let width = cols + rows;
        // [A | I], eliminated on the first `cols` columns only
        let mut aug = vec![0 as Elem; rows * width];
        for r in 0..rows {
            aug[r * width..r * width + cols].copy_from_slice(self.row(r));
            aug[r * width + cols + r] = 1;
        }
        let pivots = eliminate(f, &mut aug, rows, width, cols);
        let mut rest = v.to_vec();
        let mut coeffs = vec![0 as Elem; rows];
        for (i, &pc) in pivots.iter().enumerate() {
            let c = rest[pc];
            if c == 0 {
                continue;
            }
            let row = &aug[i * width..(i + 1) * width];
            let neg = f.neg(c);
            f.axpy(&mut rest, neg, &row[..cols]);
            f.axpy(&mut coeffs, c, &row[cols..]);
        }
        Ok(if rest.iter().all(|&x| x == 0) {
            Some(coeffs)
        } else {
            None
        })
    }

    /// Canonical (RREF) basis of `{x : M x = 0}`, as rows.
    pub fn nullspace(&self) -> MatrixQ {
        let f = &self.field;
        let r = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !r.pivots.contains(c)).collect();
        let mut basis = MatrixQ::zeros(f, 0, self.cols);
        for &fc in &free {
            let mut v = vec![0 as Elem; self.cols];
            v[fc] = 1;
            for (i, &pc) in r.pivots.iter().enumerate() {
                v[pc] = f.neg(r.matrix.get(i, fc));
            }
            basis.push_row(&v).expect("length");
        }
        basis.rref().matrix
    }

    /// Multiply `self * other`.
    pub fn mul(&self, other: &MatrixQ) -> Result<MatrixQ> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let f = &self.field;
        let mut out = MatrixQ::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                f.axpy(dst, a, other.row(k));
            }
        }
        Ok(out)
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> MatrixQ {
        let mut m = MatrixQ::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        m
    }
}

/// Subtract from `v` its components along an RREF basis.
fn reduce_against(f: &Field, basis: &MatrixQ, pivots: &[usize], v: &[Elem]) -> Vec<Elem> {
    let mut rest = v.to_vec();
    for (i, &pc) in pivots.iter().enumerate() {
        let c = rest[pc];
        if c != 0 {
            f.axpy(&mut rest, f.neg(c), basis.row(i));
        }
    }
    rest
}

/// Gauss-Jordan elimination in place on a row-major `rows x width` buffer,
/// choosing pivots only among the first `limit` columns. Returns pivot
/// columns; pivot rows are moved to the top.
fn eliminate(f: &Field, data: &mut [Elem], rows: usize, width: usize, limit: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..limit {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| data[i * width + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..width {
                data.swap(p * width + j, r * width + j);
            }
        }
        let inv = f.inv(data[r * width + c]).expect("nonzero pivot");
        f.scale_row(&mut data[r * width..(r + 1) * width], inv);
        let pivot_row: Vec<Elem> = data[r * width..(r + 1) * width].to_vec();
        for i in 0..rows {
            if i == r {
                continue;
            }
            let x = data[i * width + c];
            if x != 0 {
                f.axpy(&mut data[i * width..(i + 1) * width], f.neg(x), &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// GF(2) matrix with rows packed into 64-bit words, column `c` at bit `c % 64`
/// of word `c / 64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> BitMatrix {
        BitMatrix {
            cols,
            words: cols.div_ceil(64),
            rows: Vec::new(),
        }
    }

    pub fn from_matrix(m: &MatrixQ) -> BitMatrix {
        let mut b = BitMatrix::new(m.cols());
        for r in m.row_iter() {
            let mut w = vec![0u64; b.words];
            for (c, &x) in r.iter().enumerate() {
                if x & 1 == 1 {
                    w[c / 64] |= 1 << (c % 64);
                }
            }
            b.rows.push(w);
        }
        b
    }

    pub fn push_row(&mut self, words: Vec<u64>) {
        assert_eq!(words.len(), self.words);
        self.rows.push(words);
    }

    fn bit(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    /// In-place Gauss-Jordan; returns pivot columns and drops zero rows.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows.len() {
                break;
            }
            let Some(p) = (r..self.rows.len()).find(|&i| self.bit(i, c)) else {
                continue;
            };
            self.rows.swap(p, r);
            let pivot = self.rows[r].clone();
            for i in 0..self.rows.len() {
                if i != r && self.bit(i, c) {
                    for (d, s) in self.rows[i].iter_mut().zip(&pivot) {
                        *d ^= s;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        self.rows.truncate(r);
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn to_matrix(&self, field: &Field, take: usize) -> MatrixQ {
        let mut m = MatrixQ::zeros(field, 0, self.cols);
        for r in 0..take.min(self.rows.len()) {
            let row: Vec<Elem> = (0..self.cols).map(|c| self.bit(r, c) as Elem).collect();
            m.push_row(&row).expect("width");
        }
        m
    }
}

/// Number of k-dimensional subspaces of GF(q)^n. Zero when `k > n`.
pub fn gaussian_binomial(n: u32, k: u32, q: u32) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow(n - i) - 1u32;
        den *= q.pow(k - i) - 1u32;
    }
    num / den
}

/// Enumerates the k-dimensional subspaces of GF(q)^n by RREF basis.
///
/// Order: pivot sets lexicographically; within a pivot set the free entries
/// (row-major) are read as a base-q counter with the last entry least
/// significant.
pub struct SubspaceIter {
    field: Field,
    n: usize,
    k: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    digits: Vec<Elem>,
    single_pivot_set: bool,
    done: bool,
}

impl SubspaceIter {
    /// Fails with `BudgetExceeded` before yielding anything when the total
    /// count exceeds `budget`.
    pub fn new(n: usize, k: usize, field: &Field, budget: u64) -> Result<SubspaceIter> {
        if k > n {
            return Err(Error::InvalidParam(format!("subspace dimension {k} exceeds {n}")));
        }
        let count = gaussian_binomial(n as u32, k as u32, field.order());
        if count > BigUint::from(budget) {
            return Err(Error::BudgetExceeded {
                what: "subspace enumeration",
                needed: count.to_string(),
                budget,
            });
        }
        Ok(SubspaceIter::start(field, n, (0..k).collect(), false))
    }

    /// Only the subspaces whose RREF basis has exactly these pivot columns.
    /// Disjoint pivot sets give disjoint enumerations.
    pub fn with_pivots(n: usize, pivots: Vec<usize>, field: &Field) -> Result<SubspaceIter> {
        if pivots.windows(2).any(|w| w[0] >= w[1]) || pivots.last().is_some_and(|&p| p >= n) {
            return Err(Error::InvalidParam("pivots must be strictly increasing and < n".into()));
        }
        Ok(SubspaceIter::start(field, n, pivots, true))
    }

    fn start(field: &Field, n: usize, pivots: Vec<usize>, single: bool) -> SubspaceIter {
        let mut it = SubspaceIter {
            field: field.clone(),
            n,
            k: pivots.len(),
            pivots,
            free: Vec::new(),
            digits: Vec::new(),
            single_pivot_set: single,
            done: false,
        };
        it.reset_free();
        it
    }

    fn reset_free(&mut self) {
        self.free.clear();
        for (r, &p) in self.pivots.iter().enumerate() {
            for c in p + 1..self.n {
                if !self.pivots.contains(&c) {
                    self.free.push((r, c));
                }
            }
        }
        self.digits = vec![0; self.free.len()];
    }

    fn current(&self) -> MatrixQ {
        let mut m = MatrixQ::zeros(&self.field, self.k, self.n);
        for (r, &p) in self.pivots.iter().enumerate() {
            m.set(r, p, 1);
        }
        for (&(r, c), &d) in self.free.iter().zip(&self.digits) {
            m.set(r, c, d);
        }
        m
    }

    fn advance_digits(&mut self) -> bool {
        let q = self.field.order();
        for d in self.digits.iter_mut().rev() {
            if (*d as u32) + 1 < q {
                *d += 1;
                return true;
            }
            *d = 0;
        }
        false
    }

    fn advance_pivots(&mut self) -> bool {
        let (n, k) = (self.n, self.k);
        let Some(i) = (0..k).rev().find(|&i| self.pivots[i] < n - k + i) else {
            return false;
        };
        self.pivots[i] += 1;
        for j in i + 1..k {
            self.pivots[j] = self.pivots[j - 1] + 1;
        }
        self.reset_free();
        true
    }
}

impl Iterator for SubspaceIter {
    type Item = MatrixQ;

    fn next(&mut self) -> Option<MatrixQ> {
        if self.done {
            return None;
        }
        let out = self.current();
        if !self.advance_digits() && (self.single_pivot_set || !self.advance_pivots()) {
            self.done = true;
        }
        Some(out)
    }
}

/// Convenience wrapper matching the iterator constructor.
pub fn enumerate_subspaces(n: usize, k: usize, field: &Field, budget: u64) -> Result<SubspaceIter> {
    SubspaceIter::new(n, k, field, budget)
}

/// `gaussian_binomial` as a `u64`, saturating.
pub fn gaussian_binomial_u64(n: u32, k: u32, q: u32) -> u64 {
    gaussian_binomial(n, k, q).to_u64().unwrap_or(u64::MAX)
}
