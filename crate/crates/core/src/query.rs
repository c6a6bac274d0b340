//! Permutation queries.
//!
//! A W-private query maps the sorted demand set `W` onto a random ordering
//! of a uniformly chosen `D`-set `W'`, the sorted side set `S` onto a random
//! ordering of the a-priori repair set of `W'` (padded to exactly `M`
//! indices), and the remaining indices onto a random ordering of the rest.
//!
//! The random choices are drawn from the caller's RNG in a fixed order:
//!
//! 1. `gen_range(0..C(K, D))` picks `W'` among the `D`-subsets in
//!    lexicographic order;
//! 2. `shuffle` of `W'` (ascending) gives its ordering;
//! 3. `shuffle` of the padded repair set (ascending);
//! 4. `shuffle` of the remaining indices (ascending).
//!
//! With a seeded `ChaCha8Rng` this makes every query reproducible. The same
//! [`QueryPlan::assemble`] step is used both for sampling and for the exact
//! enumeration behind the privacy audit.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::combinat::{complement, factorial, orderings, subsets};
use crate::perm::{PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("invalid index sets: {0}")]
    Sets(String),
    #[error("invalid query plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// What the user sends to the server.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PirQuery {
    /// Column permutation of the scheme matrix (W-private schemes).
    Permutation(Permutation),
    /// The single fixed query of a (W,S)-private scheme.
    Constant,
}

impl PirQuery {
    /// `π(1) … π(K)` one-based, or the literal `const`.
    pub fn to_text(&self) -> String {
        match self {
            PirQuery::Permutation(p) => p.to_text(),
            PirQuery::Constant => "const".to_string(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, QueryError> {
        if text.trim() == "const" {
            Ok(PirQuery::Constant)
        } else {
            Ok(PirQuery::Permutation(Permutation::parse(text)?))
        }
    }
}

impl fmt::Display for PirQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Validates `(W, S)` against `[K]` and the declared sizes, returning both
/// sorted ascending.
pub fn normalize_sets(
    k: usize,
    d: usize,
    m: usize,
    w: &[usize],
    s: &[usize],
) -> Result<(Vec<usize>, Vec<usize>), QueryError> {
    let mut w = w.to_vec();
    let mut s = s.to_vec();
    w.sort_unstable();
    s.sort_unstable();
    if w.len() != d || s.len() != m {
        return Err(QueryError::Sets(format!(
            "expected |W| = {d} and |S| = {m}, got {} and {}",
            w.len(),
            s.len()
        )));
    }
    if w.windows(2).any(|p| p[0] == p[1]) || s.windows(2).any(|p| p[0] == p[1]) {
        return Err(QueryError::Sets("repeated index".into()));
    }
    if w.iter().chain(&s).any(|&i| i >= k) {
        return Err(QueryError::Sets(format!("index outside [{k}]")));
    }
    if w.iter().any(|i| s.contains(i)) {
        return Err(QueryError::Sets("W and S overlap".into()));
    }
    Ok((w, s))
}

/// One outcome of the query randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryChoices {
    /// Index of `W'` among the `D`-subsets in lexicographic order.
    pub demand_image: usize,
    pub demand_order: Vec<usize>,
    pub side_order: Vec<usize>,
    pub rest_order: Vec<usize>,
}

/// The a-priori table `W' ↦ padded repair set` shared by user and server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    k: usize,
    d: usize,
    m: usize,
    /// `(W', R(W'))` for every `D`-subset `W'` in lexicographic order;
    /// `R(W')` ascending with exactly `M` elements, disjoint from `W'`.
    sets: Vec<(Vec<usize>, Vec<usize>)>,
}

impl QueryPlan {
    /// `repair_set(W')` must return a set of exactly `m` indices disjoint from `W'`.
    pub fn new<F>(k: usize, d: usize, m: usize, mut repair_set: F) -> Result<Self, QueryError>
    where
        F: FnMut(&[usize]) -> Vec<usize>,
    {
        if d == 0 || d + m > k {
            return Err(QueryError::Plan(format!(
                "need 1 <= D and D + M <= K (K={k}, D={d}, M={m})"
            )));
        }
        let mut sets = Vec::new();
        for wp in subsets(k, d) {
            let mut r = repair_set(&wp);
            r.sort_unstable();
            r.dedup();
            if r.len() != m || r.iter().any(|x| wp.contains(x) || *x >= k) {
                return Err(QueryError::Plan(format!(
                    "repair set {r:?} for {wp:?} is not an {m}-subset of the complement"
                )));
            }
            sets.push((wp, r));
        }
        Ok(QueryPlan { k, d, m, sets })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The padded repair set of `W'` (ascending `W'`).
    pub fn repair_set(&self, demand_image: &[usize]) -> Option<&[usize]> {
        self.sets
            .iter()
            .find(|(wp, _)| wp == demand_image)
            .map(|(_, r)| r.as_slice())
    }

    pub fn sets(&self) -> &[(Vec<usize>, Vec<usize>)] {
        &self.sets
    }

    /// Builds `π` with `π(W) = W'`, `π(S) = R'(W')`, `π(P) = P'`, element by
    /// element in ascending order of `W`, `S` and `P`.
    pub fn assemble(&self, w: &[usize], s: &[usize], c: &QueryChoices) -> Result<Permutation, QueryError> {
        let (w, s) = normalize_sets(self.k, self.d, self.m, w, s)?;
        let mut ws = w.clone();
        ws.extend_from_slice(&s);
        let rest = complement(self.k, &ws);
        let mut images = vec![usize::MAX; self.k];
        for (src, dst) in [(&w, &c.demand_order), (&s, &c.side_order), (&rest, &c.rest_order)] {
            if src.len() != dst.len() {
                return Err(QueryError::Plan("choice sizes do not match the sets".into()));
            }
            for (&a, &b) in src.iter().zip(dst) {
                images[a] = b;
            }
        }
        Ok(Permutation::new(images)?)
    }

    /// Draws the query randomness from `rng` in the documented order.
    pub fn sample_choices(&self, rng: &mut dyn RngCore) -> QueryChoices {
        let demand_image = rng.gen_range(0..self.sets.len());
        let (wp, r) = &self.sets[demand_image];
        let mut demand_order = wp.clone();
        demand_order.shuffle(rng);
        let mut side_order = r.clone();
        side_order.shuffle(rng);
        let mut taken = wp.clone();
        taken.extend_from_slice(r);
        let mut rest_order = complement(self.k, &taken);
        rest_order.shuffle(rng);
        QueryChoices {
            demand_image,
            demand_order,
            side_order,
            rest_order,
        }
    }

    pub fn sample(&self, w: &[usize], s: &[usize], rng: &mut dyn RngCore) -> Result<Permutation, QueryError> {
        // validate before consuming randomness
        normalize_sets(self.k, self.d, self.m, w, s)?;
        let c = self.sample_choices(rng);
        self.assemble(w, s, &c)
    }

    /// Number of equiprobable outcomes: `C(K,D)·D!·M!·(K−D−M)!`.
    pub fn branch_count(&self) -> u64 {
        self.sets.len() as u64 * factorial(self.d) * factorial(self.m) * factorial(self.k - self.d - self.m)
    }

    /// Every outcome of the query randomness; each has probability
    /// `1 / branch_count()`.
    pub fn branches(&self) -> Vec<QueryChoices> {
        let mut out = Vec::with_capacity(self.branch_count() as usize);
        for (idx, (wp, r)) in self.sets.iter().enumerate() {
            let mut taken = wp.clone();
            taken.extend_from_slice(r);
            let rest = complement(self.k, &taken);
            let rest_orders = orderings(&rest);
            for dord in orderings(wp) {
                for sord in orderings(r) {
                    for rord in &rest_orders {
                        out.push(QueryChoices {
                            demand_image: idx,
                            demand_order: dord.clone(),
                            side_order: sord.clone(),
                            rest_order: rord.clone(),
                        });
                    }
                }
            }
        }
        out
    }
}
