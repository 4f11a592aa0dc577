//! Dense exact linear algebra over the rationals.
//!
//! Everything here is exact: row reduction, span membership, annihilators
//! and nullspaces are computed with arbitrary-precision fractions kept in
//! lowest terms. Matrices may have zero rows (an annihilator of the full
//! space, for instance) but always carry their column count.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub type QVector = Vec<Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed when `rows` is empty.
    pub fn from_rows_with_cols(rows: Vec<QVector>, cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(QMatrix {
            rows: n,
            cols,
            data,
        })
    }

    /// Builds a matrix from a non-empty list of equal-length rows.
    pub fn from_rows(rows: Vec<QVector>) -> Result<Self> {
        let cols = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Dimension("matrix has no rows".into()))?;
        Self::from_rows_with_cols(rows, cols)
    }

    /// Integer matrix literal. Panics on ragged input.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows: Vec<QVector> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| rational::int(x)).collect())
            .collect();
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows_with_cols(rows, cols).expect("ragged integer matrix literal")
    }

    /// Builds a matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[QVector]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Dimension(format!(
                    "column {} has {} entries, expected {rows}",
                    j + 1,
                    col.len()
                )));
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<QVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> QVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<QVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<QVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Side-by-side concatenation of matrices with equal row counts.
    pub fn hstack(parts: &[&QMatrix]) -> Result<QMatrix> {
        let rows = parts
            .first()
            .map(|m| m.rows)
            .ok_or_else(|| Error::Dimension("nothing to concatenate".into()))?;
        if let Some(bad) = parts.iter().find(|m| m.rows != rows) {
            return Err(Error::Dimension(format!(
                "row counts differ ({} vs {})",
                rows, bad.rows
            )));
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for m in parts {
            for i in 0..rows {
                for j in 0..m.cols {
                    out[(i, offset + j)] = m[(i, j)].clone();
                }
            }
            offset += m.cols;
        }
        Ok(out)
    }

    /// Top-to-bottom concatenation of matrices with equal column counts.
    pub fn vstack(parts: &[&QMatrix]) -> Result<QMatrix> {
        let t: Vec<QMatrix> = parts.iter().map(|m| m.transpose()).collect();
        let refs: Vec<&QMatrix> = t.iter().collect();
        Ok(Self::hstack(&refs)?.transpose())
    }

    pub fn scaled(&self, factor: &Rational) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn negated(&self) -> QMatrix {
        self.scaled(&-Rational::one())
    }

    /// The matrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> QMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for (k, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                out[(i, k)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(rational::is_integral)
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

/// Rows separated by newlines, entries by single spaces. This is also the
/// matrix file format accepted by [`crate::io::parse_matrix`].
impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(rational::to_canonical).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Entrywise sum of the given vectors, all of dimension `dim`.
pub fn sum_vectors<'a, I>(dim: usize, vs: I) -> QVector
where
    I: IntoIterator<Item = &'a QVector>,
{
    let mut acc = vec![Rational::zero(); dim];
    for v in vs {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: QMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row echelon form. Pivots are the first nonzero entry found when
/// scanning columns left to right and, within a column, rows top to bottom.
pub fn rref(m: &QMatrix) -> Rref {
    let mut r = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r.cols {
        if row == r.rows {
            break;
        }
        let Some(p) = (row..r.rows).find(|&i| !r[(i, col)].is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..r.cols {
                r.data.swap(p * r.cols + j, row * r.cols + j);
            }
        }
        let inv = r[(row, col)].recip();
        for j in col..r.cols {
            let x = &r[(row, j)] * &inv;
            r[(row, j)] = x;
        }
        for i in 0..r.rows {
            if i == row || r[(i, col)].is_zero() {
                continue;
            }
            let factor = r[(i, col)].clone();
            for j in col..r.cols {
                if r[(row, j)].is_zero() {
                    continue;
                }
                let delta = &factor * &r[(row, j)];
                r[(i, j)] -= delta;
            }
        }
        pivots.push(col);
        row += 1;
    }
    let rank = pivots.len();
    Rref {
        matrix: r,
        pivots,
        rank,
    }
}

pub fn rank(m: &QMatrix) -> usize {
    rref(m).rank
}

/// Coefficients expressing `v` as a combination of `basis`, if `v` lies in
/// their span. The list may be linearly dependent; coefficients on
/// non-pivot vectors are zero. The empty list spans only the zero vector.
pub fn span_membership(basis: &[QVector], v: &[Rational]) -> Result<Option<QVector>> {
    let dim = v.len();
    if let Some(bad) = basis.iter().find(|b| b.len() != dim) {
        return Err(Error::Dimension(format!(
            "basis vector of length {} against target of length {dim}",
            bad.len()
        )));
    }
    if basis.is_empty() {
        return Ok(is_zero_vector(v).then(Vec::new));
    }
    let n = basis.len();
    let mut aug = QMatrix::zeros(dim, n + 1);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..dim {
            aug[(i, j)] = b[i].clone();
        }
    }
    for i in 0..dim {
        aug[(i, n)] = v[i].clone();
    }
    let red = rref(&aug);
    if red.pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut coeffs = vec![Rational::zero(); n];
    for (row, &p) in red.pivots.iter().enumerate() {
        coeffs[p] = red.matrix[(row, n)].clone();
    }
    Ok(Some(coeffs))
}

/// Basis of `{x : Mx = 0}`, one vector per non-pivot column of `rref(M)`,
/// with that column's entry set to one.
pub fn nullspace_basis(m: &QMatrix) -> Vec<QVector> {
    let red = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    (0..m.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = vec![Rational::zero(); m.cols];
            x[f] = Rational::one();
            for (row, &p) in red.pivots.iter().enumerate() {
                x[p] = -red.matrix[(row, f)].clone();
            }
            x
        })
        .collect()
}

/// A matrix `R` in reduced row echelon form whose rows span the annihilator
/// of `span(vectors)`: for every `w` of length `dim`, `R w = 0` exactly when
/// `w` lies in that span.
pub fn residual_functionals(vectors: &[QVector], dim: usize) -> Result<QMatrix> {
    if let Some(bad) = vectors.iter().find(|s| s.len() != dim) {
        return Err(Error::Dimension(format!(
            "vector of length {} in a space of dimension {dim}",
            bad.len()
        )));
    }
    let stacked = QMatrix::from_rows_with_cols(vectors.to_vec(), dim)?;
    let annihilator = nullspace_basis(&stacked);
    let m = QMatrix::from_rows_with_cols(annihilator, dim)?;
    let red = rref(&m);
    let rows: Vec<QVector> = (0..red.rank).map(|i| red.matrix.row(i).to_vec()).collect();
    QMatrix::from_rows_with_cols(rows, dim)
}
