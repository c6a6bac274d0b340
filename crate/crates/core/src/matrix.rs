//! Dense matrices over GF(q) with exact elimination.

use std::fmt;

use thiserror::Error;

use crate::field::{field_of_order, Field, FieldError};
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("column permutation of length {got} for {cols} columns is not a bijection")]
    NotBijection { got: usize, cols: usize },
    #[error("index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
    #[error("repeated index {0}")]
    RepeatedIndex(usize),
    #[error("malformed matrix text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MatrixError>;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Result of Gauss-Jordan elimination.
#[derive(Debug, Clone)]
pub struct Rref {
    pub rref: Matrix,
    pub rank: usize,
    /// Zero-based pivot column of each nonzero row, ascending.
    pub pivot_columns: Vec<usize>,
}

/// Answer to "is `v` in the row space of `A`?".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub member: bool,
    /// `u` with `u · A = v` when `member`; empty otherwise.
    pub coefficients: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}; {}x{}](", self.field, self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                f.write_str("; ")?;
            }
            for (c, v) in self.row(r).iter().enumerate() {
                if c > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
            }
        }
        f.write_str(")")
    }
}

/// Gauss-Jordan on a row-major buffer, pivoting only in columns `< limit`.
fn eliminate(field: &Field, data: &mut [u32], rows: usize, cols: usize, limit: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..limit {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(data[r * cols + c]).unwrap();
        if inv != 1 {
            for j in c..cols {
                data[r * cols + j] = field.mul(data[r * cols + j], inv);
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = data[i * cols + c];
            if factor == 0 {
                continue;
            }
            let nf = field.neg(factor);
            for j in c..cols {
                let delta = field.mul(nf, data[r * cols + j]);
                data[i * cols + j] = field.add(data[i * cols + j], delta);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major integer encodings.
    pub fn new(field: &Field, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(MatrixError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for &v in &data {
            field.check(v)?;
        }
        Ok(Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from rows; all rows must have length `cols`.
    pub fn from_rows(field: &Field, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(MatrixError::Dimension(format!(
                    "row of length {} in a matrix with {cols} columns",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Matrix::new(field, rows.len(), cols, data)
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) -> Result<()> {
        self.field.check(v)?;
        self.data[r * self.cols + c] = v;
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    fn same_field(&self, other: &Field) -> Result<()> {
        if &self.field != other {
            return Err(FieldError::FieldMismatch(self.field.order(), other.order()).into());
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_field(&rhs.field)?;
        if self.cols != rhs.rows {
            return Err(MatrixError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, rhs.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    /// `A · x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.cols {
            return Err(MatrixError::Dimension(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    /// `u · A` for a row vector `u`.
    pub fn vec_mul(&self, u: &[u32]) -> Result<Vec<u32>> {
        if u.len() != self.rows {
            return Err(MatrixError::Dimension(format!(
                "vector of length {} for {} rows",
                u.len(),
                self.rows
            )));
        }
        let f = &self.field;
        let mut out = vec![0; self.cols];
        for (r, &c) in u.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(c, a));
            }
        }
        Ok(out)
    }

    pub fn rref_rank(&self) -> Rref {
        let mut data = self.data.clone();
        let pivots = eliminate(&self.field, &mut data, self.rows, self.cols, self.cols);
        Rref {
            rref: Matrix {
                field: self.field.clone(),
                rows: self.rows,
                cols: self.cols,
                data,
            },
            rank: pivots.len(),
            pivot_columns: pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref_rank().rank
    }

    /// Decides whether `v` lies in the row space and, if so, returns `u` with
    /// `u · A = v`. Free variables of the system are set to zero.
    pub fn row_space_membership(&self, v: &[u32]) -> Result<MembershipCertificate> {
        if v.len() != self.cols {
            return Err(MatrixError::Dimension(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        for &x in v {
            self.field.check(x)?;
        }
        // Solve A^T u^T = v^T on the augmented system [A^T | v].
        let (n, width) = (self.cols, self.rows + 1);
        let mut aug = vec![0u32; n * width];
        for c in 0..n {
            for r in 0..self.rows {
                aug[c * width + r] = self.get(r, c);
            }
            aug[c * width + self.rows] = v[c];
        }
        let pivots = eliminate(&self.field, &mut aug, n, width, self.rows);
        let consistent = (pivots.len()..n).all(|i| aug[i * width + self.rows] == 0);
        if !consistent {
            return Ok(MembershipCertificate {
                member: false,
                coefficients: Vec::new(),
            });
        }
        let mut u = vec![0; self.rows];
        for (i, &pc) in pivots.iter().enumerate() {
            u[pc] = aug[i * width + self.rows];
        }
        Ok(MembershipCertificate {
            member: true,
            coefficients: u,
        })
    }

    /// Basis of `{x : A xᵀ = 0}`, one row per free column in ascending order.
    pub fn null_space_basis(&self) -> Matrix {
        let Rref {
            rref, pivot_columns, ..
        } = self.rref_rank();
        let f = &self.field;
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivot_columns {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = Matrix::zeros(f, free.len(), self.cols);
        for (b, &fc) in free.iter().enumerate() {
            out.data[b * self.cols + fc] = 1;
            for (i, &pc) in pivot_columns.iter().enumerate() {
                out.data[b * self.cols + pc] = f.neg(rref.get(i, fc));
            }
        }
        out
    }

    /// Column `i` of the result is column `pi(i)` of `self`.
    pub fn permute_columns(&self, pi: &Permutation) -> Result<Matrix> {
        if pi.len() != self.cols {
            return Err(MatrixError::NotBijection {
                got: pi.len(),
                cols: self.cols,
            });
        }
        let mut out = Matrix::zeros(&self.field, self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[r * self.cols + c] = self.get(r, pi.apply(c));
            }
        }
        Ok(out)
    }

    /// Same as [`Matrix::permute_columns`] for a raw image list.
    pub fn permute_columns_by(&self, images: &[usize]) -> Result<Matrix> {
        let pi = Permutation::new(images.to_vec()).map_err(|_| MatrixError::NotBijection {
            got: images.len(),
            cols: self.cols,
        })?;
        self.permute_columns(&pi)
    }

    /// Submatrix with the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix> {
        for &c in cols {
            if c >= self.cols {
                return Err(MatrixError::IndexOutOfRange {
                    index: c,
                    cols: self.cols,
                });
            }
        }
        let mut out = Matrix::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        Ok(out)
    }

    /// Nonzero rows of the RREF: a full-rank matrix with the same row space.
    pub fn row_basis(&self) -> Matrix {
        let Rref { rref, rank, .. } = self.rref_rank();
        Matrix {
            field: self.field.clone(),
            rows: rank,
            cols: self.cols,
            data: rref.data[..rank * self.cols].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&c| (0..self.rows).all(|r| self.get(r, c) == 0))
            .collect()
    }

    /// `|W| × K` matrix whose j-th row is the unit vector at `indices[j]`.
    pub fn unit_selector(field: &Field, indices: &[usize], cols: usize) -> Result<Matrix> {
        let mut seen = vec![false; cols];
        let mut out = Matrix::zeros(field, indices.len(), cols);
        for (j, &i) in indices.iter().enumerate() {
            if i >= cols {
                return Err(MatrixError::IndexOutOfRange { index: i, cols });
            }
            if seen[i] {
                return Err(MatrixError::RepeatedIndex(i));
            }
            seen[i] = true;
            out.data[j * cols + i] = 1;
        }
        Ok(out)
    }

    /// Normative text form: `q rows cols` then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.field.order(), self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Matrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
        let (m, rest) = Matrix::parse_lines(&mut lines)?;
        if rest {
            return Err(MatrixError::Parse("trailing content".into()));
        }
        Ok(m)
    }

    /// Reads one matrix block from a line iterator. The flag reports whether
    /// unread lines remain.
    pub(crate) fn parse_lines<'a, I>(lines: &mut std::iter::Peekable<I>) -> Result<(Matrix, bool)>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines
            .next()
            .ok_or_else(|| MatrixError::Parse("missing header".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| MatrixError::Parse(format!("bad header {header:?}")))?;
        let [q, rows, cols] = nums[..] else {
            return Err(MatrixError::Parse(format!("bad header {header:?}")));
        };
        let field = field_of_order(u32::try_from(q).map_err(|_| MatrixError::Parse("q too large".into()))?)?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| MatrixError::Parse(format!("missing row {}", r + 1)))?;
            let vals: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| MatrixError::Parse(format!("bad row {line:?}")))?;
            if vals.len() != cols {
                return Err(MatrixError::Parse(format!(
                    "row {} has {} entries, expected {cols}",
                    r + 1,
                    vals.len()
                )));
            }
            data.extend(vals);
        }
        let m = Matrix::new(&field, rows, cols, data)?;
        Ok((m, lines.peek().is_some()))
    }
}

/// `y = x` reindexed so that `y[pi(i)] = x[i]`.
pub fn push_forward(x: &[u32], pi: &Permutation) -> Vec<u32> {
    let mut y = vec![0; x.len()];
    for (i, &v) in x.iter().enumerate() {
        y[pi.apply(i)] = v;
    }
    y
}
