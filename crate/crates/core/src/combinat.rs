//! Small enumeration helpers shared by the exhaustive checkers.

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64)
        .try_fold(1u64, |a, b| a.checked_mul(b))
        .unwrap_or(u64::MAX)
}

/// Iterator over the `k`-subsets of `items`, in lexicographic order of positions.
pub struct Subsets<'a> {
    items: &'a [usize],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Subsets<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i]).collect();
        let n = self.items.len();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

pub fn subsets_of(items: &[usize], k: usize) -> Subsets<'_> {
    Subsets {
        items,
        idx: (0..k).collect(),
        done: k > items.len(),
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let items: Vec<usize> = (0..n).collect();
    let v: Vec<Vec<usize>> = subsets_of(&items, k).collect();
    v.into_iter()
}

/// All orderings of `items` in lexicographic order of positions.
pub fn orderings(items: &[usize]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    let mut out = Vec::with_capacity(factorial(items.len()) as usize);
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // next lexicographic permutation of idx
        let Some(i) = (1..idx.len()).rev().find(|&i| idx[i - 1] < idx[i]) else {
            break;
        };
        let j = (i..idx.len()).rev().find(|&j| idx[j] > idx[i - 1]).unwrap();
        idx.swap(i - 1, j);
        idx[i..].reverse();
    }
    out
}

/// Complement of a sorted or unsorted index set within `0..n`, ascending.
pub fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &i in set {
        mask[i] = true;
    }
    (0..n).filter(|&i| !mask[i]).collect()
}

/// All vectors of `GF(q)^len` as integer digit vectors, least-significant digit
/// first in the enumeration index.
pub fn digits_of(mut index: u64, q: u32, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (index % q as u64) as u32;
            index /= q as u64;
            d
        })
        .collect()
}

pub fn index_of(digits: &[u32], q: u32) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * q as u64 + d as u64)
}

/// `q^e` if it fits in u64.
pub fn checked_power(q: u32, e: usize) -> Option<u64> {
    (q as u64).checked_pow(e as u32)
}
