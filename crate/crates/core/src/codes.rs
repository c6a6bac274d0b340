//! Linear-code analysis: minimum distance, repair groups, all-symbol and
//! cooperative locality, the distance/size/rate bounds for locally
//! recoverable codes, and the equal-or-disjoint neighbourhood check for
//! codes with optimal parameters.
//!
//! All searches are exhaustive and deterministic. Ties are broken by the
//! lexicographically smallest index set (zero-based), then the smallest
//! coefficient vector, so client and server derive the same repair table.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::combinat::{binomial, checked_power, complement, digits_of, subsets_of};
use crate::field::Field;
use crate::matrix::{Matrix, MatrixError};
use crate::Rational;

/// Largest codeword (or dual codeword) count enumerated exhaustively.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

/// Largest number of rank tests in a cooperative-locality search.
pub const COOPERATIVE_SEARCH_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{what} needs {size} steps, above the limit {limit}")]
    Guard { what: &'static str, size: u64, limit: u64 },
    #[error("generator and parity check are inconsistent: {0}")]
    Inconsistent(String),
    #[error("the code has dimension 0")]
    ZeroDimension,
    #[error("coordinate {index} out of range for length {n}")]
    Coordinate { index: usize, n: usize },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("malformed code text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CodeError>;

/// A linear `[n, k]_q` code carrying both a generator and a parity check.
#[derive(Clone)]
pub struct LinearCode {
    generator: Matrix,
    parity_check: Matrix,
    distance: OnceLock<usize>,
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]_{} code", self.n(), self.k(), self.field().order())
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.generator == other.generator && self.parity_check == other.parity_check
    }
}

impl LinearCode {
    /// Code spanned by the rows of `g`. Dependent rows are dropped.
    pub fn from_generator(g: &Matrix) -> Self {
        let generator = if g.rank() == g.rows() { g.clone() } else { g.row_basis() };
        let parity_check = generator.null_space_basis();
        LinearCode {
            generator,
            parity_check,
            distance: OnceLock::new(),
        }
    }

    /// Null space of `h`. A full-rank `h` is kept verbatim as the parity
    /// check; otherwise it is replaced by a row basis.
    pub fn from_parity_check(h: &Matrix) -> Self {
        let parity_check = if h.rank() == h.rows() { h.clone() } else { h.row_basis() };
        let generator = parity_check.null_space_basis();
        LinearCode {
            generator,
            parity_check,
            distance: OnceLock::new(),
        }
    }

    pub fn from_both(g: &Matrix, h: &Matrix) -> Result<Self> {
        if g.cols() != h.cols() {
            return Err(CodeError::Inconsistent("different lengths".into()));
        }
        let n = g.cols();
        if g.rank() != g.rows() || h.rank() != h.rows() || g.rows() + h.rows() != n {
            return Err(CodeError::Inconsistent("ranks do not add up to n".into()));
        }
        if !g.mul(&h.transpose())?.is_zero() {
            return Err(CodeError::Inconsistent("G·Hᵀ ≠ 0".into()));
        }
        Ok(LinearCode {
            generator: g.clone(),
            parity_check: h.clone(),
            distance: OnceLock::new(),
        })
    }

    pub fn field(&self) -> &Field {
        self.generator.field()
    }

    pub fn n(&self) -> usize {
        self.generator.cols()
    }

    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &Matrix {
        &self.parity_check
    }

    pub fn dual(&self) -> LinearCode {
        LinearCode {
            generator: self.parity_check.clone(),
            parity_check: self.generator.clone(),
            distance: OnceLock::new(),
        }
    }

    pub fn rate(&self) -> Rational {
        Rational::new(self.k() as u64, self.n() as u64)
    }

    pub fn contains(&self, word: &[u32]) -> Result<bool> {
        Ok(self.parity_check.mul_vec(word)?.iter().all(|&s| s == 0))
    }

    /// Every codeword, in message order (message digits least-significant first).
    pub fn codewords(&self) -> Result<Vec<Vec<u32>>> {
        span(&self.generator)
    }

    /// Minimum Hamming weight of a nonzero codeword, by enumerating all
    /// `q^k` messages. Cached after the first call.
    pub fn min_distance(&self) -> Result<usize> {
        if let Some(&d) = self.distance.get() {
            return Ok(d);
        }
        if self.k() == 0 {
            return Err(CodeError::ZeroDimension);
        }
        let d = span(&self.generator)?
            .iter()
            .map(|c| weight(c))
            .filter(|&w| w > 0)
            .min()
            .unwrap_or(0);
        Ok(*self.distance.get_or_init(|| d))
    }

    pub fn to_text(&self) -> String {
        format!(
            "code {} {} {}\n{}{}",
            self.n(),
            self.k(),
            self.field().order(),
            self.generator.to_text(),
            self.parity_check.to_text()
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
        let header = lines.next().ok_or_else(|| CodeError::Parse("missing header".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let nums: Vec<usize> = match parts.as_slice() {
            ["code", rest @ ..] if rest.len() == 3 => rest
                .iter()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| CodeError::Parse(format!("bad header {header:?}")))?,
            _ => return Err(CodeError::Parse(format!("bad header {header:?}"))),
        };
        let (g, _) = Matrix::parse_lines(&mut lines)?;
        let (h, rest) = Matrix::parse_lines(&mut lines)?;
        if rest {
            return Err(CodeError::Parse("trailing content".into()));
        }
        let code = LinearCode::from_both(&g, &h)?;
        if [code.n(), code.k(), code.field().order() as usize] != nums[..] {
            return Err(CodeError::Parse("header disagrees with matrices".into()));
        }
        Ok(code)
    }
}

pub fn weight(v: &[u32]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

pub fn support(v: &[u32]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i).collect()
}

/// All vectors in the row space of a full-rank matrix.
fn span(m: &Matrix) -> Result<Vec<Vec<u32>>> {
    let q = m.field().order();
    let count = checked_power(q, m.rows())
        .filter(|&c| c <= ENUMERATION_LIMIT)
        .ok_or(CodeError::Guard {
            what: "codeword enumeration",
            size: checked_power(q, m.rows()).unwrap_or(u64::MAX),
            limit: ENUMERATION_LIMIT,
        })?;
    (0..count).map(|i| Ok(m.vec_mul(&digits_of(i, q, m.rows()))?)).collect()
}

/// A repair relation `c_i = Σ λ_l c_l` over the members `l ∈ R(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairGroup {
    pub coordinate: usize,
    /// `R(i)`, ascending, never containing `coordinate`.
    pub members: Vec<usize>,
    /// `λ_l`, aligned with `members`.
    pub coefficients: Vec<u32>,
}

impl RepairGroup {
    /// `Γ(i) = {i} ∪ R(i)`, ascending.
    pub fn neighbourhood(&self) -> Vec<usize> {
        let mut g = self.members.clone();
        g.push(self.coordinate);
        g.sort_unstable();
        g
    }

    /// Evaluates the relation on a word.
    pub fn repair(&self, field: &Field, word: &[u32]) -> u32 {
        self.members
            .iter()
            .zip(&self.coefficients)
            .fold(0, |acc, (&l, &lam)| field.add(acc, field.mul(lam, word[l])))
    }

    /// True iff the relation holds on every codeword, decided by dual
    /// membership of `e_i − Σ λ_l e_l`.
    pub fn holds_on(&self, code: &LinearCode) -> Result<bool> {
        let f = code.field();
        let mut v = vec![0; code.n()];
        v[self.coordinate] = 1;
        for (&l, &lam) in self.members.iter().zip(&self.coefficients) {
            v[l] = f.neg(lam);
        }
        Ok(code.parity_check().row_space_membership(&v)?.member)
    }

    /// Extends the group with the smallest unused indices up to `size`
    /// members; the added members get coefficient zero.
    pub fn padded(&self, n: usize, size: usize) -> RepairGroup {
        let mut members = self.members.clone();
        let mut taken = self.neighbourhood();
        for c in 0..n {
            if members.len() >= size {
                break;
            }
            if !taken.contains(&c) {
                members.push(c);
                taken.push(c);
            }
        }
        let mut pairs: Vec<(usize, u32)> = members
            .into_iter()
            .map(|m| {
                let lam = self
                    .members
                    .iter()
                    .position(|&x| x == m)
                    .map_or(0, |p| self.coefficients[p]);
                (m, lam)
            })
            .collect();
        pairs.sort_unstable();
        RepairGroup {
            coordinate: self.coordinate,
            members: pairs.iter().map(|p| p.0).collect(),
            coefficients: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Adds the smallest indices of `0..n` outside `exclude ∪ base` to `base`
/// until it has `size` elements. Returns the result ascending.
pub fn pad_set(n: usize, exclude: &[usize], base: &[usize], size: usize) -> Vec<usize> {
    let mut out = base.to_vec();
    for c in 0..n {
        if out.len() >= size {
            break;
        }
        if !exclude.contains(&c) && !out.contains(&c) {
            out.push(c);
        }
    }
    out.sort_unstable();
    out
}

/// Dual codewords of weight at most `max_weight`.
fn light_dual_words(code: &LinearCode, max_weight: usize) -> Result<Vec<Vec<u32>>> {
    Ok(span(code.parity_check())?
        .into_iter()
        .filter(|v| {
            let w = weight(v);
            w > 0 && w <= max_weight
        })
        .collect())
}

fn group_from_dual_word(field: &Field, i: usize, v: &[u32]) -> RepairGroup {
    let vi = v[i];
    let members: Vec<usize> = support(v).into_iter().filter(|&l| l != i).collect();
    let coefficients = members
        .iter()
        .map(|&l| field.neg(field.div(v[l], vi).unwrap()))
        .collect();
    RepairGroup {
        coordinate: i,
        members,
        coefficients,
    }
}

fn best_group(field: &Field, i: usize, words: &[Vec<u32>]) -> Option<RepairGroup> {
    words
        .iter()
        .filter(|v| v[i] != 0)
        .map(|v| group_from_dual_word(field, i, v))
        .min_by(|a, b| (&a.members, &a.coefficients).cmp(&(&b.members, &b.coefficients)))
}

/// Every distinct repair group of size at most `r` for coordinate `i`.
pub fn repair_candidates(code: &LinearCode, i: usize, r: usize) -> Result<Vec<RepairGroup>> {
    check_coordinate(code, i)?;
    let mut out: Vec<RepairGroup> = light_dual_words(code, r + 1)?
        .iter()
        .filter(|v| v[i] != 0)
        .map(|v| group_from_dual_word(code.field(), i, v))
        .collect();
    out.sort_by(|a, b| (&a.members, &a.coefficients).cmp(&(&b.members, &b.coefficients)));
    out.dedup();
    Ok(out)
}

fn check_coordinate(code: &LinearCode, i: usize) -> Result<()> {
    if i >= code.n() {
        return Err(CodeError::Coordinate { index: i, n: code.n() });
    }
    Ok(())
}

/// Smallest repair group of size at most `r` for coordinate `i`, found via a
/// dual codeword of weight at most `r + 1` through `i`.
pub fn find_repair_group(code: &LinearCode, i: usize, r: usize) -> Result<Option<RepairGroup>> {
    check_coordinate(code, i)?;
    let words = light_dual_words(code, r + 1)?;
    Ok(best_group(code.field(), i, &words))
}

/// Outcome of an all-symbol locality check.
#[derive(Debug, Clone)]
pub struct LocalityCheck {
    pub r: usize,
    pub groups: Vec<Option<RepairGroup>>,
}

impl LocalityCheck {
    pub fn holds(&self) -> bool {
        self.groups.iter().all(Option::is_some)
    }

    pub fn missing(&self) -> Vec<usize> {
        (0..self.groups.len()).filter(|&i| self.groups[i].is_none()).collect()
    }

    pub fn into_plan(self) -> Option<RepairPlan> {
        let n = self.groups.len();
        let groups: Option<Vec<RepairGroup>> = self.groups.into_iter().collect();
        groups.map(|groups| RepairPlan {
            n,
            r: self.r,
            groups,
            cooperative: None,
        })
    }
}

pub fn verify_all_symbol_locality(code: &LinearCode, r: usize) -> Result<LocalityCheck> {
    let words = light_dual_words(code, r + 1)?;
    let groups = (0..code.n()).map(|i| best_group(code.field(), i, &words)).collect();
    Ok(LocalityCheck { r, groups })
}

/// `Γ(Δ)` for one erased set `Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooperativeEntry {
    pub delta: Vec<usize>,
    pub gamma: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooperativePlan {
    pub ell: usize,
    pub entries: Vec<CooperativeEntry>,
}

impl CooperativePlan {
    pub fn gamma(&self, delta: &[usize]) -> Option<&[usize]> {
        self.entries
            .iter()
            .find(|e| e.delta == delta)
            .map(|e| e.gamma.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct CooperativeCheck {
    pub r: usize,
    pub ell: usize,
    /// Every `Δ` of size `ℓ` in lexicographic order with its first feasible `Γ`.
    pub entries: Vec<(Vec<usize>, Option<Vec<usize>>)>,
}

impl CooperativeCheck {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|(_, g)| g.is_some())
    }

    pub fn failures(&self) -> Vec<Vec<usize>> {
        self.entries
            .iter()
            .filter(|(_, g)| g.is_none())
            .map(|(d, _)| d.clone())
            .collect()
    }

    pub fn into_plan(self) -> Option<CooperativePlan> {
        let ell = self.ell;
        let entries: Option<Vec<CooperativeEntry>> = self
            .entries
            .into_iter()
            .map(|(delta, g)| g.map(|gamma| CooperativeEntry { delta, gamma }))
            .collect();
        entries.map(|entries| CooperativePlan { ell, entries })
    }
}

/// True iff the symbols on `delta` are a function of those on `gamma`, i.e.
/// `rank(G_Γ) = rank(G_{Δ∪Γ})`.
pub fn determines(code: &LinearCode, gamma: &[usize], delta: &[usize]) -> Result<bool> {
    let g = code.generator();
    let base = g.select_columns(gamma)?.rank();
    let mut both = gamma.to_vec();
    both.extend_from_slice(delta);
    Ok(g.select_columns(&both)?.rank() == base)
}

/// Searches, for every `Δ` of size `ell`, the first `Γ ⊆ [n]∖Δ` with
/// `|Γ| ≤ r` that determines `Δ`. Candidates are ordered by size, then
/// lexicographically.
pub fn cooperative_locality(code: &LinearCode, r: usize, ell: usize) -> Result<CooperativeCheck> {
    let n = code.n();
    if ell == 0 || ell >= n {
        return Err(CodeError::Parameters(format!(
            "cooperative set size {ell} must lie in 1..={}",
            n - 1
        )));
    }
    let per_delta: u64 = (0..=r.min(n - ell)).map(|s| binomial(n - ell, s)).sum();
    let cost = binomial(n, ell).saturating_mul(per_delta);
    if cost > COOPERATIVE_SEARCH_LIMIT {
        return Err(CodeError::Guard {
            what: "cooperative locality search",
            size: cost,
            limit: COOPERATIVE_SEARCH_LIMIT,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let mut entries = Vec::new();
    for delta in subsets_of(&all, ell) {
        let rest = complement(n, &delta);
        let mut found = None;
        'search: for size in 0..=r.min(rest.len()) {
            for gamma in subsets_of(&rest, size) {
                if determines(code, &gamma, &delta)? {
                    found = Some(gamma);
                    break 'search;
                }
            }
        }
        entries.push((delta, found));
    }
    Ok(CooperativeCheck { r, ell, entries })
}

/// The a-priori repair table: one group per coordinate, plus optional
/// cooperative entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPlan {
    pub n: usize,
    /// Locality budget the plan was built for.
    pub r: usize,
    pub groups: Vec<RepairGroup>,
    pub cooperative: Option<CooperativePlan>,
}

impl RepairPlan {
    /// Assembles a plan without checking it against any code.
    pub fn new(n: usize, r: usize, groups: Vec<RepairGroup>) -> Self {
        RepairPlan {
            n,
            r,
            groups,
            cooperative: None,
        }
    }

    pub fn with_cooperative(mut self, plan: CooperativePlan) -> Self {
        self.cooperative = Some(plan);
        self
    }

    pub fn group(&self, i: usize) -> &RepairGroup {
        &self.groups[i]
    }

    /// Largest group actually used.
    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).max().unwrap_or(0)
    }

    /// Coordinates whose group is empty (the symbol is identically zero).
    pub fn locality_zero(&self) -> Vec<usize> {
        self.groups
            .iter()
            .filter(|g| g.members.is_empty())
            .map(|g| g.coordinate)
            .collect()
    }

    /// Checks every stored relation against the code.
    pub fn verify(&self, code: &LinearCode) -> Result<bool> {
        if self.n != code.n() || self.groups.len() != self.n {
            return Ok(false);
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.coordinate != i || g.members.contains(&i) || g.members.len() > self.r {
                return Ok(false);
            }
            if !g.holds_on(code)? {
                return Ok(false);
            }
        }
        if let Some(coop) = &self.cooperative {
            for e in &coop.entries {
                if e.gamma.len() > self.r
                    || e.gamma.iter().any(|x| e.delta.contains(x))
                    || !determines(code, &e.gamma, &e.delta)?
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// A bound value next to the literal comparison against the code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck<T> {
    pub value: T,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub r: usize,
    pub ell: Option<usize>,
    pub d: usize,
    /// `n − k − ⌈k/r⌉ + 2` against `d` (needs `r ≥ 1`).
    pub singleton_lrc_bound: Option<BoundCheck<i64>>,
    /// `n − k + 1 − ℓ(⌈k/r⌉ − 1)` against `d`, only when `r ≥ ℓ`.
    pub cooperative_bound: Option<BoundCheck<i64>>,
    /// Exponent `n − ⌈n/(r+1)⌉` of the size bound, against `k`.
    pub max_size_exponent: BoundCheck<usize>,
    /// `q^(n − ⌈n/(r+1)⌉)` when it fits in 128 bits.
    pub max_size_value: Option<u128>,
    /// `r/(r+1)` against `k/n`.
    pub rate_bound_classical: BoundCheck<Rational>,
    /// `r/n` against `k/n`, only when `ℓ > r`.
    pub rate_bound_cooperative_large_ell: Option<BoundCheck<Rational>>,
}

impl BoundsReport {
    pub fn all_satisfied(&self) -> bool {
        self.singleton_lrc_bound.as_ref().is_none_or(|b| b.satisfied)
            && self.cooperative_bound.as_ref().is_none_or(|b| b.satisfied)
            && self.max_size_exponent.satisfied
            && self.rate_bound_classical.satisfied
            && self
                .rate_bound_cooperative_large_ell
                .as_ref()
                .is_none_or(|b| b.satisfied)
    }

    pub fn render(&self) -> String {
        let mut s = format!("n={} k={} q={} r={} d={}\n", self.n, self.k, self.q, self.r, self.d);
        if let Some(l) = self.ell {
            s.push_str(&format!("ell={l}\n"));
        }
        let flag = |b: bool| if b { "PASS" } else { "FAIL" };
        if let Some(b) = &self.singleton_lrc_bound {
            s.push_str(&format!("distance_bound={} {}\n", b.value, flag(b.satisfied)));
        }
        if let Some(b) = &self.cooperative_bound {
            s.push_str(&format!(
                "cooperative_distance_bound={} {}\n",
                b.value,
                flag(b.satisfied)
            ));
        }
        let size = self.max_size_value.map_or_else(
            || format!("{}^{}", self.q, self.max_size_exponent.value),
            |v| v.to_string(),
        );
        s.push_str(&format!(
            "max_size_bound={} {}\n",
            size,
            flag(self.max_size_exponent.satisfied)
        ));
        s.push_str(&format!(
            "rate_bound={} {}\n",
            self.rate_bound_classical.value,
            flag(self.rate_bound_classical.satisfied)
        ));
        if let Some(b) = &self.rate_bound_cooperative_large_ell {
            s.push_str(&format!("cooperative_rate_bound={} {}\n", b.value, flag(b.satisfied)));
        }
        s
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Evaluates the locality bounds for `code` with the plan's `r` (and `ℓ`).
pub fn check_bounds(code: &LinearCode, plan: &RepairPlan) -> Result<BoundsReport> {
    let (n, k, r) = (code.n(), code.k(), plan.r);
    let q = code.field().order();
    let d = code.min_distance()?;
    let ell = plan.cooperative.as_ref().map(|c| c.ell);
    let singleton_lrc_bound = (r >= 1).then(|| {
        let value = n as i64 - k as i64 - ceil_div(k, r) as i64 + 2;
        BoundCheck {
            value,
            satisfied: d as i64 <= value,
        }
    });
    let cooperative_bound = ell.filter(|&l| r >= l && r >= 1).map(|l| {
        let value = n as i64 - k as i64 + 1 - l as i64 * (ceil_div(k, r) as i64 - 1);
        BoundCheck {
            value,
            satisfied: d as i64 <= value,
        }
    });
    let exponent = n - ceil_div(n, r + 1);
    let max_size_value = (q as u128).checked_pow(exponent as u32);
    let rate = Rational::new(k as u64, n as u64);
    let classical = Rational::new(r as u64, r as u64 + 1);
    let rate_bound_cooperative_large_ell = ell.filter(|&l| l > r).map(|_| {
        let value = Rational::new(r as u64, n as u64);
        BoundCheck {
            value,
            satisfied: rate <= value,
        }
    });
    Ok(BoundsReport {
        n,
        k,
        q,
        r,
        ell,
        d,
        singleton_lrc_bound,
        cooperative_bound,
        max_size_exponent: BoundCheck {
            value: exponent,
            satisfied: k <= exponent,
        },
        max_size_value,
        rate_bound_classical: BoundCheck {
            value: classical,
            satisfied: rate <= classical,
        },
        rate_bound_cooperative_large_ell,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureVerdict {
    NotApplicable,
    /// Distinct neighbourhood classes, each ascending.
    Pass {
        classes: Vec<Vec<usize>>,
    },
    /// Two coordinates whose neighbourhoods overlap without being equal.
    Fail {
        i: usize,
        j: usize,
    },
}

/// For `r | k`, `r < k` and `n = k + k/r`, every pair of neighbourhoods
/// `Γ(i)`, `Γ(j)` must be equal or disjoint.
pub fn check_structure_theorem(code: &LinearCode, plan: &RepairPlan) -> StructureVerdict {
    let (n, k, r) = (code.n(), code.k(), plan.r);
    if r == 0 || k % r != 0 || r >= k || n != k + k / r {
        return StructureVerdict::NotApplicable;
    }
    let hoods: Vec<Vec<usize>> = plan.groups.iter().map(RepairGroup::neighbourhood).collect();
    for i in 0..hoods.len() {
        for j in i + 1..hoods.len() {
            let overlap = hoods[i].iter().any(|x| hoods[j].contains(x));
            if overlap && hoods[i] != hoods[j] {
                return StructureVerdict::Fail { i, j };
            }
        }
    }
    let mut classes = hoods;
    classes.sort();
    classes.dedup();
    StructureVerdict::Pass { classes }
}
