//! Permutations of `[K]` used as PIR queries.
//!
//! A permutation is stored by its images: `pi.apply(i)` is π(i), zero-based.
//! The text form lists π(1) … π(K) one-based, separated by spaces.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("not a bijection on [{0}]")]
    NotBijection(usize),
    #[error("malformed permutation text: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(PermError::NotBijection(n));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse(text: &str) -> Result<Self, PermError> {
        let images = text
            .split_whitespace()
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(PermError::Parse(t.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Permutation::new(images)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "π[{}]", self.to_text())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_is_one_based() {
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(p.to_text(), "2 3 1");
        assert_eq!(Permutation::parse("2 3 1").unwrap(), p);
        assert!(Permutation::parse("1 1 2").is_err());
        assert!(Permutation::parse("0 1").is_err());
        assert!(Permutation::parse("1 x").is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = Permutation::new(vec![3, 0, 2, 1]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(4));
        assert_eq!(p.inverse().compose(&p), Permutation::identity(4));
    }
}
