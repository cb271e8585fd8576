//! Dense square matrices over GF(q). These are the concrete group elements
//! handed to the recognizer.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldSpec};

/// Square matrix over a finite field, row-major, entries stored as field
/// codes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    dim: usize,
    data: Vec<u64>,
}

/// Elements of the black-box groups are matrices.
pub type GroupElement = Matrix;

impl Matrix {
    pub fn zero(field: &FieldSpec, dim: usize) -> Self {
        Matrix {
            field: field.clone(),
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn identity(field: &FieldSpec, dim: usize) -> Self {
        Self::scalar(field, dim, 1)
    }

    pub fn scalar(field: &FieldSpec, dim: usize, code: u64) -> Self {
        let mut m = Self::zero(field, dim);
        for i in 0..dim {
            m.data[i * dim + i] = code;
        }
        m
    }

    pub fn from_codes(field: &FieldSpec, dim: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(data.len(), dim * dim));
        }
        if let Some(&bad) = data.iter().find(|&&c| c >= field.q()) {
            return Err(Error::Parse(format!("code {bad} out of range")));
        }
        Ok(Matrix {
            field: field.clone(),
            dim,
            data,
        })
    }

    /// Builds a matrix from integer rows, reducing each entry into the
    /// prime subfield.
    pub fn from_int_rows(field: &FieldSpec, rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(row.len(), dim));
            }
            data.extend(row.iter().map(|&v| field.int_code(v)));
        }
        Self::from_codes(field, dim, data)
    }

    pub fn from_elements(rows: &[Vec<FieldElement>]) -> Result<Self> {
        let dim = rows.len();
        let field = rows
            .first()
            .and_then(|r| r.first())
            .map(|e| e.spec().clone())
            .ok_or_else(|| Error::Parse("empty matrix".into()))?;
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(row.len(), dim));
            }
            for e in row {
                if e.spec() != &field {
                    return Err(Error::FieldMismatch);
                }
                data.push(e.code());
            }
        }
        Self::from_codes(&field, dim, data)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codes(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, code: u64) {
        debug_assert!(code < self.field.q());
        self.data[i * self.dim + j] = code;
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.field.element(self.get(i, j))
    }

    fn compatible(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Matrix) -> Matrix {
        let d = self.dim;
        let f = &self.field;
        let mut out = vec![0u64; d * d];
        if let Some(p) = f.small_prime() {
            // Entries < 2^16, so products < 2^32 and a row of sums fits a u64.
            let mut acc = vec![0u64; d];
            for i in 0..d {
                acc.fill(0);
                for k in 0..d {
                    let a = self.data[i * d + k];
                    if a == 0 {
                        continue;
                    }
                    let brow = &other.data[k * d..(k + 1) * d];
                    for (s, &b) in acc.iter_mut().zip(brow) {
                        *s += a * b;
                    }
                }
                for (o, s) in out[i * d..(i + 1) * d].iter_mut().zip(&acc) {
                    *o = s % p;
                }
            }
        } else {
            for i in 0..d {
                for k in 0..d {
                    let a = self.data[i * d + k];
                    if a == 0 {
                        continue;
                    }
                    for j in 0..d {
                        let t = f.mul(a, other.data[k * d + j]);
                        out[i * d + j] = f.add(out[i * d + j], t);
                    }
                }
            }
        }
        Matrix {
            field: f.clone(),
            dim: d,
            data: out,
        }
    }

    fn zip_with(&self, other: &Matrix, op: impl Fn(u64, u64) -> u64) -> Result<Matrix> {
        self.compatible(other)?;
        Ok(Matrix {
            field: self.field.clone(),
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| self.field.add(a, b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| self.field.sub(a, b))
    }

    pub fn scale(&self, code: u64) -> Matrix {
        Matrix {
            field: self.field.clone(),
            dim: self.dim,
            data: self.data.iter().map(|&a| self.field.mul(a, code)).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.dim;
        let mut data = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j];
            }
        }
        Matrix {
            field: self.field.clone(),
            dim: d,
            data,
        }
    }

    /// Reduces `rows` (width `w`) to row echelon form in place and returns
    /// the pivot columns. With `full` set, pivots are scaled to one and
    /// eliminated above as well (reduced form).
    fn echelon(f: &FieldSpec, rows: &mut [u64], h: usize, w: usize, cols: usize, full: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == h {
                break;
            }
            let Some(pr) = (r..h).find(|&i| rows[i * w + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..w {
                    rows.swap(pr * w + j, r * w + j);
                }
            }
            let inv = f.inv(rows[r * w + c]).expect("pivot is nonzero");
            if full {
                for j in 0..w {
                    rows[r * w + j] = f.mul(rows[r * w + j], inv);
                }
            }
            let start = if full { 0 } else { r + 1 };
            for i in start..h {
                if i == r || rows[i * w + c] == 0 {
                    continue;
                }
                let factor = if full {
                    rows[i * w + c]
                } else {
                    f.mul(rows[i * w + c], inv)
                };
                for j in c..w {
                    let t = f.mul(factor, rows[r * w + j]);
                    rows[i * w + j] = f.sub(rows[i * w + j], t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        Self::echelon(&self.field, &mut rows, self.dim, self.dim, self.dim, false).len()
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix> {
        let d = self.dim;
        let w = 2 * d;
        let mut rows = vec![0u64; d * w];
        for i in 0..d {
            rows[i * w..i * w + d].copy_from_slice(&self.data[i * d..(i + 1) * d]);
            rows[i * w + d + i] = 1;
        }
        let pivots = Self::echelon(&self.field, &mut rows, d, w, d, true);
        if pivots.len() < d {
            return Err(Error::Singular);
        }
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            data.extend_from_slice(&rows[i * w + d..(i + 1) * w]);
        }
        Ok(Matrix {
            field: self.field.clone(),
            dim: d,
            data,
        })
    }

    pub fn det(&self) -> FieldElement {
        let f = &self.field;
        let d = self.dim;
        let mut rows = self.data.clone();
        let mut det = 1u64;
        for c in 0..d {
            let Some(pr) = (c..d).find(|&i| rows[i * d + c] != 0) else {
                return f.zero();
            };
            if pr != c {
                for j in 0..d {
                    rows.swap(pr * d + j, c * d + j);
                }
                det = f.neg(det);
            }
            let pivot = rows[c * d + c];
            det = f.mul(det, pivot);
            let inv = f.inv(pivot).expect("pivot is nonzero");
            for i in c + 1..d {
                let factor = f.mul(rows[i * d + c], inv);
                if factor == 0 {
                    continue;
                }
                for j in c..d {
                    let t = f.mul(factor, rows[c * d + j]);
                    rows[i * d + j] = f.sub(rows[i * d + j], t);
                }
            }
        }
        f.element(det)
    }

    /// `Some(λ)` when the matrix equals λ·I.
    pub fn is_scalar(&self) -> Option<FieldElement> {
        let d = self.dim;
        let lambda = *self.data.first()?;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { lambda } else { 0 };
                if self.data[i * d + j] != expect {
                    return None;
                }
            }
        }
        Some(self.field.element(lambda))
    }

    pub fn is_identity(&self) -> bool {
        self.is_scalar().is_some_and(|l| l.code() == 1)
    }

    pub fn pow(&self, e: &BigUint) -> Matrix {
        let mut acc = Matrix::identity(&self.field, self.dim);
        for bit in (0..e.bits()).rev() {
            acc = acc.mul_unchecked(&acc);
            if e.bit(bit) {
                acc = acc.mul_unchecked(self);
            }
        }
        acc
    }

    pub fn pow_u64(&self, e: u64) -> Matrix {
        self.pow(&BigUint::from(e))
    }

    /// Parses one matrix in the text dump format: one row per line, entries
    /// separated by commas. Extension-field entries are written as a
    /// parenthesised coefficient list, e.g. `(1,2)`.
    pub fn parse(field: &FieldSpec, text: &str) -> Result<Matrix> {
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            rows.push(parse_row(field, line)?);
        }
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(row.len(), dim));
            }
            data.extend(row);
        }
        Matrix::from_codes(field, dim, data)
    }

    /// Parses a sequence of matrices separated by blank lines. Lines
    /// starting with `#` are comments.
    pub fn parse_many(field: &FieldSpec, text: &str) -> Result<Vec<Matrix>> {
        let mut out = Vec::new();
        let mut block = String::new();
        for line in text.lines().chain(std::iter::once("")) {
            let t = line.trim();
            if t.starts_with('#') {
                continue;
            }
            if t.is_empty() {
                if !block.trim().is_empty() {
                    out.push(Matrix::parse(field, &block)?);
                }
                block.clear();
            } else {
                block.push_str(t);
                block.push('\n');
            }
        }
        Ok(out)
    }
}

fn parse_row(field: &FieldSpec, line: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    if field.k() == 1 {
        for tok in line.split(',') {
            out.push(field.parse_element(tok)?.code());
        }
        return Ok(out);
    }
    let mut rest = line;
    loop {
        rest = rest.trim_start_matches([',', ' ']);
        if rest.is_empty() {
            break;
        }
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| Error::Parse(format!("expected '(c0,...)' entry in {line:?}")))?;
        out.push(field.parse_element(inner.0)?.code());
        rest = inner.1;
    }
    Ok(out)
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on mismatched shapes or fields; use [`Matrix::mul`] for a
    /// checked product.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.compatible(rhs).expect("incompatible matrices");
        self.mul_unchecked(rhs)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let e = self.entry(i, j);
                    if self.field.k() == 1 {
                        e.to_string()
                    } else {
                        format!("({e})")
                    }
                })
                .collect();
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}x{} over {:?}]\n{}", self.dim, self.dim, self.field, self)
    }
}
