//! Code families: Partition-and-Code solution matrices, binary simplex codes
//! and Vandermonde (generalized Reed-Solomon) MDS parity checks.

use thiserror::Error;

use crate::codes::LinearCode;
use crate::field::{make_field, Field};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("field GF({q}) has fewer than {needed} distinct evaluation points")]
    FieldTooSmall { q: u32, needed: usize },
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

/// Block layout `K = α(M+1) + β` with `0 ≤ β < M+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacLayout {
    pub k: usize,
    pub m: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl PacLayout {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if m < 1 || m + 1 > k {
            return Err(ConstructionError::Parameters(format!(
                "need 1 <= M <= K-1, got K={k}, M={m}"
            )));
        }
        Ok(PacLayout {
            k,
            m,
            alpha: k / (m + 1),
            beta: k % (m + 1),
        })
    }

    /// `⌈K/(M+1)⌉`, the number of blocks (and of downloaded symbols).
    pub fn blocks(&self) -> usize {
        self.alpha + usize::from(self.beta > 0)
    }

    /// Column ranges of the blocks, left to right.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let w = self.m + 1;
        let mut out: Vec<_> = (0..self.alpha).map(|b| b * w..(b + 1) * w).collect();
        if self.beta > 0 {
            out.push(self.alpha * w..self.k);
        }
        out
    }
}

/// The `⌈K/(M+1)⌉ × K` matrix whose rows are all-ones on consecutive blocks
/// of width `M+1` (the last block has width `β` when `β > 0`).
pub fn partition_and_code(k: usize, m: usize, field: &Field) -> Result<Matrix> {
    let layout = PacLayout::new(k, m)?;
    let mut rows = Vec::with_capacity(layout.blocks());
    for range in layout.block_ranges() {
        let mut row = vec![0; k];
        for c in range {
            row[c] = 1;
        }
        rows.push(row);
    }
    Ok(Matrix::from_rows(field, k, &rows).expect("0/1 entries fit every field"))
}

/// Binary simplex code of dimension `m`: the generator's columns are the
/// nonzero vectors of GF(2)^m in ascending integer order (bit `t` in row `t`).
pub fn simplex_code(m: usize) -> Result<LinearCode> {
    if !(2..=12).contains(&m) {
        return Err(ConstructionError::Parameters(format!(
            "simplex dimension {m} outside 2..=12"
        )));
    }
    let f2 = make_field(2, 1).unwrap();
    let n = (1usize << m) - 1;
    let rows: Vec<Vec<u32>> = (0..m)
        .map(|t| (1..=n).map(|v| ((v >> t) & 1) as u32).collect())
        .collect();
    let g = Matrix::from_rows(&f2, n, &rows).unwrap();
    Ok(LinearCode::from_generator(&g))
}

/// `(K−M) × K` Vandermonde matrix on the evaluation points `0, 1, …, K−1`
/// (ascending encodings): row `t` holds `x^t`. Every `K−M` columns are
/// independent, so it is a parity check of a `(K, M)` MDS code.
pub fn grs_mds_parity_check(k: usize, m: usize, field: &Field) -> Result<Matrix> {
    if m >= k {
        return Err(ConstructionError::Parameters(format!(
            "need 0 <= M < K, got K={k}, M={m}"
        )));
    }
    if (field.order() as usize) < k {
        return Err(ConstructionError::FieldTooSmall {
            q: field.order(),
            needed: k,
        });
    }
    let rows: Vec<Vec<u32>> = (0..k - m)
        .map(|t| (0..k as u32).map(|x| field.pow(x, t as u32)).collect())
        .collect();
    Ok(Matrix::from_rows(field, k, &rows).unwrap())
}

/// An `(n, k)` MDS code: the null space of the Vandermonde parity check.
pub fn mds_code(n: usize, k: usize, field: &Field) -> Result<LinearCode> {
    if k == 0 {
        return Err(ConstructionError::Parameters("MDS dimension must be positive".into()));
    }
    Ok(LinearCode::from_parity_check(&grs_mds_parity_check(n, k, field)?))
}
