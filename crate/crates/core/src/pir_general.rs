//! PIR-SI from arbitrary (possibly non-linear) locally recoverable codes.
//!
//! An optimal LRC `C ⊂ GF(q)^K` with locality `M` has a coordinate split
//! `P1 ∪ P2` where `P1` determines `P2` and `|P2| = ⌈K/(M+1)⌉ = T_OPT`.
//! Translating `C` by the vectors `u_j` that are zero on `P1` and run through
//! `GF(q)^{P2}` tiles the whole space. The answer to a permutation query is
//! the index of the translate containing the reindexed database, written as
//! `T_OPT` base-q digits.
//!
//! Conventions:
//! - the reindexed database is `Y` with `Y[π(i)] = X[i]`, the same map the
//!   linear schemes apply to columns;
//! - `u_j` carries the base-q digits of `j`, least-significant first, on the
//!   `P2` coordinates in ascending order;
//! - the answer lists the same digits, least-significant first.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::RngCore;
use thiserror::Error;

use crate::codes::{pad_set, CodeError, LinearCode, RepairPlan};
use crate::combinat::{checked_power, digits_of, index_of, subsets_of};
use crate::field::{field_of_order, Field, FieldError};
use crate::matrix::push_forward;
use crate::perm::Permutation;
use crate::pir_linear::{PirAnswer, PirError, PirProtocol, PrivacyMode, SchemeParams};
use crate::query::{normalize_sets, PirQuery, QueryError, QueryPlan};
use crate::Rational;

/// Largest ambient space `q^n` enumerated exhaustively.
pub const SPACE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneralError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Pir(#[from] PirError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("codeword {0:?} has the wrong length or is repeated")]
    BadCodeword(Vec<u32>),
    #[error("coordinate {} is not a function of its repair group", .0 + 1)]
    NotFunctional(usize),
    #[error("repair group of coordinate {} has {size} members, above the locality {r}", .coordinate + 1)]
    Locality { coordinate: usize, size: usize, r: usize },
    #[error("code of size {size} is not optimal: expected {expected}")]
    NonOptimal { size: u64, expected: u64 },
    #[error("translations do not tile the space: {0}")]
    Coverage(String),
    #[error("{what} of size {size} exceeds the limit {limit}")]
    Guard { what: &'static str, size: u64, limit: u64 },
    #[error("map for coordinate {} is not a bijection of the field", .0 + 1)]
    NotBijection(usize),
    #[error("no decoder reproduces coordinate {} on the selected fiber", .0 + 1)]
    NoDecoder(usize),
    #[error("malformed general code text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GeneralError>;

type IndexedWords = (Vec<Vec<u32>>, HashMap<Vec<u32>, usize>);

/// A repair function `g_i` stored as a lookup table over `c_{R(i)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairFunction {
    pub coordinate: usize,
    /// `R(i)`, ascending.
    pub group: Vec<usize>,
    pub table: HashMap<Vec<u32>, u32>,
}

impl RepairFunction {
    pub fn eval(&self, group_values: &[u32]) -> Option<u32> {
        self.table.get(group_values).copied()
    }
}

/// An explicit code with per-coordinate repair functions.
#[derive(Debug, Clone)]
pub struct GeneralLrc {
    field: Field,
    n: usize,
    /// Ascending lexicographic order; the encoder maps message `j` to entry `j`.
    codewords: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    repair: Vec<RepairFunction>,
}

impl PartialEq for GeneralLrc {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.n == other.n
            && self.codewords == other.codewords
            && self.repair == other.repair
    }
}

fn project(word: &[u32], coords: &[usize]) -> Vec<u32> {
    coords.iter().map(|&c| word[c]).collect()
}

impl GeneralLrc {
    /// Builds the code and its repair tables from the codewords; fails if a
    /// coordinate is not a function of its group.
    pub fn new(field: &Field, n: usize, codewords: Vec<Vec<u32>>, groups: Vec<Vec<usize>>) -> Result<Self> {
        let (codewords, index) = Self::index_words(field, n, codewords)?;
        if groups.len() != n {
            return Err(GeneralError::Parameters(format!(
                "{} repair groups for length {n}",
                groups.len()
            )));
        }
        let mut repair = Vec::with_capacity(n);
        for (i, mut group) in groups.into_iter().enumerate() {
            group.sort_unstable();
            group.dedup();
            if group.contains(&i) || group.iter().any(|&g| g >= n) {
                return Err(GeneralError::Parameters(format!(
                    "bad repair group {group:?} for {}",
                    i + 1
                )));
            }
            let table = Self::tabulate(&codewords, i, &group).ok_or(GeneralError::NotFunctional(i))?;
            repair.push(RepairFunction {
                coordinate: i,
                group,
                table,
            });
        }
        Ok(GeneralLrc {
            field: field.clone(),
            n,
            codewords,
            index,
            repair,
        })
    }

    /// Like [`GeneralLrc::new`], choosing for each coordinate the smallest
    /// (then lexicographically first) group of size at most `r` that
    /// determines it.
    pub fn with_locality_search(field: &Field, n: usize, codewords: Vec<Vec<u32>>, r: usize) -> Result<Self> {
        let (codewords, _) = Self::index_words(field, n, codewords)?;
        let mut groups = Vec::with_capacity(n);
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let found = (0..=r.min(n - 1))
                .flat_map(|size| subsets_of(&others, size))
                .find(|g| Self::tabulate(&codewords, i, g).is_some());
            groups.push(found.ok_or(GeneralError::NotFunctional(i))?);
        }
        Self::new(field, n, codewords, groups)
    }

    /// Enumerates a linear code and turns its repair plan into tables.
    pub fn from_linear(code: &LinearCode, plan: &RepairPlan) -> Result<Self> {
        let groups = plan.groups.iter().map(|g| g.members.clone()).collect();
        Self::new(code.field(), code.n(), code.codewords()?, groups)
    }

    fn index_words(field: &Field, n: usize, mut words: Vec<Vec<u32>>) -> Result<IndexedWords> {
        if words.is_empty() {
            return Err(GeneralError::Parameters("empty code".into()));
        }
        for w in &words {
            if w.len() != n {
                return Err(GeneralError::BadCodeword(w.clone()));
            }
            for &v in w {
                field.check(v)?;
            }
        }
        words.sort();
        if let Some(p) = words.windows(2).find(|p| p[0] == p[1]) {
            return Err(GeneralError::BadCodeword(p[0].clone()));
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok((words, index))
    }

    fn tabulate(words: &[Vec<u32>], i: usize, group: &[usize]) -> Option<HashMap<Vec<u32>, u32>> {
        let mut table = HashMap::new();
        for w in words {
            let key = project(w, group);
            match table.get(&key) {
                Some(&v) if v != w[i] => return None,
                Some(_) => {}
                None => {
                    table.insert(key, w[i]);
                }
            }
        }
        Some(table)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Vec<u32>] {
        &self.codewords
    }

    pub fn contains(&self, word: &[u32]) -> bool {
        self.index.contains_key(word)
    }

    pub fn repair_function(&self, i: usize) -> &RepairFunction {
        &self.repair[i]
    }

    /// Largest repair group.
    pub fn locality(&self) -> usize {
        self.repair.iter().map(|g| g.group.len()).max().unwrap_or(0)
    }

    /// `⌊log_q |C|⌋`, the message length of the encoder.
    pub fn dimension(&self) -> usize {
        let q = self.field.order() as u64;
        let mut k = 0;
        let mut p = 1u64;
        while p * q <= self.codewords.len() as u64 {
            p *= q;
            k += 1;
        }
        k
    }

    /// True when `|C|` is a power of `q`, i.e. the encoder is a bijection.
    pub fn encoder_is_bijective(&self) -> bool {
        checked_power(self.field.order(), self.dimension()) == Some(self.codewords.len() as u64)
    }

    /// Encoder `f`: message digits (least-significant first) to codeword.
    pub fn encode(&self, message: &[u32]) -> Result<Vec<u32>> {
        if message.len() != self.dimension() {
            return Err(GeneralError::Parameters(format!(
                "message of length {} for dimension {}",
                message.len(),
                self.dimension()
            )));
        }
        for &v in message {
            self.field.check(v)?;
        }
        Ok(self.codewords[index_of(message, self.field.order()) as usize].clone())
    }

    /// `g_i` applied to the group symbols of `word`.
    pub fn repair(&self, i: usize, word: &[u32]) -> Option<u32> {
        let f = &self.repair[i];
        f.eval(&project(word, &f.group))
    }

    /// Every repair function reproduces its coordinate on every codeword.
    pub fn verify_repair(&self) -> bool {
        self.codewords
            .iter()
            .all(|w| (0..self.n).all(|i| self.repair(i, w) == Some(w[i])))
    }

    /// Closed under addition and scalar multiplication.
    pub fn is_linear(&self) -> bool {
        let f = &self.field;
        let has_zero = self.contains(&vec![0; self.n]);
        has_zero
            && self.codewords.iter().all(|a| {
                self.codewords.iter().all(|b| {
                    let sum: Vec<u32> = a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect();
                    self.contains(&sum)
                }) && (1..f.order()).all(|s| {
                    let scaled: Vec<u32> = a.iter().map(|&x| f.mul(s, x)).collect();
                    self.contains(&scaled)
                })
            })
    }

    /// `|C| = q^(n − ⌈n/(r+1)⌉)`.
    pub fn is_optimal(&self, r: usize) -> bool {
        checked_power(self.field.order(), self.n - self.n.div_ceil(r + 1)) == Some(self.codewords.len() as u64)
    }

    /// `gcode n q count`, one codeword per line, then one line per
    /// coordinate: `i | R(i) | key:value;…` with one-based indices.
    pub fn to_text(&self) -> String {
        let mut s = format!("gcode {} {} {}\n", self.n, self.field.order(), self.codewords.len());
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        for w in &self.codewords {
            s.push_str(&join(w));
            s.push('\n');
        }
        for f in &self.repair {
            let mut rows: Vec<(&Vec<u32>, &u32)> = f.table.iter().collect();
            rows.sort();
            let group: Vec<String> = f.group.iter().map(|g| (g + 1).to_string()).collect();
            let rows: Vec<String> = rows.iter().map(|(k, v)| format!("{}:{}", join(k), v)).collect();
            let _ = writeln!(s, "{} | {} | {}", f.coordinate + 1, group.join(" "), rows.join(";"));
        }
        s
    }

    /// Parses [`GeneralLrc::to_text`]; the tables are rebuilt from the
    /// codewords and must agree with the stored rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bad = |m: &str| GeneralError::Parse(m.to_string());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .collect();
        let [tag, n, q, count] = header[..] else {
            return Err(bad("bad header"));
        };
        if tag != "gcode" {
            return Err(bad("bad header tag"));
        }
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad(t));
        let (n, q, count) = (num(n)?, num(q)?, num(count)?);
        let field = field_of_order(q as u32)?;
        let nums = |t: &str| -> Result<Vec<u32>> {
            t.split_whitespace()
                .map(|x| x.parse::<u32>().map_err(|_| bad(x)))
                .collect()
        };
        let mut words = Vec::with_capacity(count);
        for _ in 0..count {
            words.push(nums(lines.next().ok_or_else(|| bad("missing codeword"))?)?);
        }
        let mut groups = vec![Vec::new(); n];
        let mut stored = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("missing repair table"))?;
            let parts: Vec<&str> = line.split('|').map(str::trim).collect();
            let [i, group, rows] = parts[..] else {
                return Err(bad(line));
            };
            let i = num(i)?.checked_sub(1).filter(|&i| i < n).ok_or_else(|| bad(line))?;
            groups[i] = group
                .split_whitespace()
                .map(|g| num(g)?.checked_sub(1).ok_or_else(|| bad(g)))
                .collect::<Result<_>>()?;
            let mut table = HashMap::new();
            for row in rows.split(';').filter(|r| !r.trim().is_empty()) {
                let (k, v) = row.split_once(':').ok_or_else(|| bad(row))?;
                table.insert(nums(k)?, v.trim().parse::<u32>().map_err(|_| bad(v))?);
            }
            stored.push((i, table));
        }
        if lines.next().is_some() {
            return Err(bad("trailing content"));
        }
        let code = GeneralLrc::new(&field, n, words, groups)?;
        for (i, table) in stored {
            if code.repair[i].table != table {
                return Err(GeneralError::NotFunctional(i));
            }
        }
        Ok(code)
    }
}

/// Relabels coordinate `i` by the bijection `sigmas[i]` (given as the image
/// of each field element) and conjugates the repair functions accordingly.
pub fn wrap_nonlinear(lrc: &GeneralLrc, sigmas: &[Vec<u32>]) -> Result<GeneralLrc> {
    let q = lrc.field.order();
    if sigmas.len() != lrc.n {
        return Err(GeneralError::Parameters(format!(
            "{} maps for length {}",
            sigmas.len(),
            lrc.n
        )));
    }
    for (i, s) in sigmas.iter().enumerate() {
        let mut seen = vec![false; q as usize];
        if s.len() != q as usize {
            return Err(GeneralError::NotBijection(i));
        }
        for &v in s {
            if v >= q || seen[v as usize] {
                return Err(GeneralError::NotBijection(i));
            }
            seen[v as usize] = true;
        }
    }
    let apply = |w: &[u32]| -> Vec<u32> { w.iter().enumerate().map(|(i, &v)| sigmas[i][v as usize]).collect() };
    let words: Vec<Vec<u32>> = lrc.codewords.iter().map(|w| apply(w)).collect();
    let (codewords, index) = GeneralLrc::index_words(&lrc.field, lrc.n, words)?;
    // g'_i(y) = σ_i(g_i(σ⁻¹(y))): relabel keys and values of each table
    let repair = lrc
        .repair
        .iter()
        .map(|f| RepairFunction {
            coordinate: f.coordinate,
            group: f.group.clone(),
            table: f
                .table
                .iter()
                .map(|(key, &val)| {
                    let k2 = key.iter().zip(&f.group).map(|(&v, &g)| sigmas[g][v as usize]).collect();
                    (k2, sigmas[f.coordinate][val as usize])
                })
                .collect(),
        })
        .collect();
    Ok(GeneralLrc {
        field: lrc.field.clone(),
        n: lrc.n,
        codewords,
        index,
        repair,
    })
}

/// Greedy split: repeatedly take the lowest uncovered coordinate `i`, put it
/// in `P2` and its repair group (minus what is already in `P2`) in `P1`.
/// Requires an optimal code; returns `(P1, P2)` ascending.
pub fn greedy_partition(lrc: &GeneralLrc, r: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = lrc.n;
    for f in &lrc.repair {
        if f.group.len() > r {
            return Err(GeneralError::Locality {
                coordinate: f.coordinate,
                size: f.group.len(),
                r,
            });
        }
    }
    let t_opt = n.div_ceil(r + 1);
    let expected = checked_power(lrc.field.order(), n - t_opt).unwrap_or(u64::MAX);
    if lrc.len() as u64 != expected {
        return Err(GeneralError::NonOptimal {
            size: lrc.len() as u64,
            expected,
        });
    }
    let mut in_p1 = vec![false; n];
    let mut in_p2 = vec![false; n];
    while let Some(i) = (0..n).find(|&i| !in_p1[i] && !in_p2[i]) {
        for &g in &lrc.repair[i].group {
            if !in_p2[g] {
                in_p1[g] = true;
            }
        }
        in_p2[i] = true;
    }
    let p1: Vec<usize> = (0..n).filter(|&i| in_p1[i]).collect();
    let p2: Vec<usize> = (0..n).filter(|&i| in_p2[i]).collect();
    if p2.len() != t_opt {
        return Err(GeneralError::NonOptimal {
            size: lrc.len() as u64,
            expected,
        });
    }
    Ok((p1, p2))
}

/// Translations of an optimal LRC that tile `GF(q)^n`.
#[derive(Debug, Clone)]
pub struct CosetSystem {
    base: GeneralLrc,
    r: usize,
    t_opt: usize,
    p1: Vec<usize>,
    p2: Vec<usize>,
    translations: Vec<Vec<u32>>,
    by_p1: HashMap<Vec<u32>, usize>,
}

/// Builds the `q^T_OPT` translations `u_j` and verifies, by enumerating the
/// whole space, that the translates are disjoint and cover it.
pub fn coset_system(lrc: &GeneralLrc, r: usize) -> Result<CosetSystem> {
    let (p1, p2) = greedy_partition(lrc, r)?;
    let n = lrc.n;
    let q = lrc.field.order();
    let space = checked_power(q, n)
        .filter(|&s| s <= SPACE_LIMIT)
        .ok_or(GeneralError::Guard {
            what: "ambient space",
            size: checked_power(q, n).unwrap_or(u64::MAX),
            limit: SPACE_LIMIT,
        })?;
    let t_opt = p2.len();
    let count = checked_power(q, t_opt).unwrap();
    let translations: Vec<Vec<u32>> = (0..count)
        .map(|j| {
            let digits = digits_of(j, q, t_opt);
            let mut u = vec![0; n];
            for (&c, &d) in p2.iter().zip(&digits) {
                u[c] = d;
            }
            u
        })
        .collect();
    let mut by_p1 = HashMap::new();
    for (idx, w) in lrc.codewords.iter().enumerate() {
        if by_p1.insert(project(w, &p1), idx).is_some() {
            return Err(GeneralError::Coverage("P1 does not determine the codeword".into()));
        }
    }
    let f = &lrc.field;
    let mut hits = vec![0u8; space as usize];
    for u in &translations {
        for w in &lrc.codewords {
            let y: Vec<u32> = w.iter().zip(u).map(|(&a, &b)| f.add(a, b)).collect();
            let slot = &mut hits[index_of(&y, q) as usize];
            if *slot > 0 {
                return Err(GeneralError::Coverage(format!("{y:?} lies in two translates")));
            }
            *slot = 1;
        }
    }
    if let Some(missing) = hits.iter().position(|&h| h == 0) {
        return Err(GeneralError::Coverage(format!(
            "{:?} is not covered",
            digits_of(missing as u64, q, n)
        )));
    }
    Ok(CosetSystem {
        base: lrc.clone(),
        r,
        t_opt,
        p1,
        p2,
        translations,
        by_p1,
    })
}

impl CosetSystem {
    pub fn base(&self) -> &GeneralLrc {
        &self.base
    }

    pub fn t_opt(&self) -> usize {
        self.t_opt
    }

    pub fn locality(&self) -> usize {
        self.r
    }

    pub fn p1(&self) -> &[usize] {
        &self.p1
    }

    pub fn p2(&self) -> &[usize] {
        &self.p2
    }

    pub fn translations(&self) -> &[Vec<u32>] {
        &self.translations
    }

    /// Members of `C + u_j`.
    pub fn coset(&self, j: usize) -> Vec<Vec<u32>> {
        let f = &self.base.field;
        let u = &self.translations[j];
        self.base
            .codewords
            .iter()
            .map(|w| w.iter().zip(u).map(|(&a, &b)| f.add(a, b)).collect())
            .collect()
    }

    /// The unique `a` with `y ∈ C + u_a`.
    pub fn locate(&self, y: &[u32]) -> usize {
        let f = &self.base.field;
        let c = &self.base.codewords[self.by_p1[&project(y, &self.p1)]];
        let digits: Vec<u32> = self.p2.iter().map(|&i| f.sub(y[i], c[i])).collect();
        index_of(&digits, f.order()) as usize
    }
}

/// PIR-SI code built on the translates of an optimal LRC (single message).
#[derive(Debug, Clone)]
pub struct GeneralPirCode {
    params: SchemeParams,
    cosets: CosetSystem,
    queries: QueryPlan,
}

/// Client-side state for one query.
#[derive(Debug, Clone)]
pub struct GeneralDecoder {
    /// `W'`.
    target: usize,
    /// For each member `l` of `R(W')`: position of `π⁻¹(l)` within sorted `S`.
    side_positions: Vec<usize>,
}

impl GeneralPirCode {
    pub fn new(lrc: &GeneralLrc, m: usize) -> Result<Self> {
        let k = lrc.n;
        if m + 1 > k {
            return Err(GeneralError::Parameters(format!("need M + 1 <= K (K={k}, M={m})")));
        }
        let cosets = coset_system(lrc, m)?;
        let queries = QueryPlan::new(k, 1, m, |wp| pad_set(k, wp, &lrc.repair[wp[0]].group, m))?;
        Ok(GeneralPirCode {
            params: SchemeParams {
                k,
                m,
                d: 1,
                q: lrc.field.order(),
            },
            cosets,
            queries,
        })
    }

    pub fn cosets(&self) -> &CosetSystem {
        &self.cosets
    }

    pub fn query_plan(&self) -> &QueryPlan {
        &self.queries
    }

    /// `A_π(X)`: the base-q digits of the translate index of the reindexed database.
    pub fn answer_encode(&self, pi: &Permutation, x: &[u32]) -> Result<PirAnswer> {
        let f = self.field();
        if x.len() != self.params.k || pi.len() != self.params.k {
            return Err(PirError::Length {
                expected: self.params.k,
                got: x.len().min(pi.len()),
            }
            .into());
        }
        for &v in x {
            f.check(v)?;
        }
        let a = self.cosets.locate(&push_forward(x, pi));
        Ok(PirAnswer {
            values: digits_of(a as u64, f.order(), self.cosets.t_opt),
        })
    }

    /// `g_{W'}(Y_{R(W')} − u_a) + u_a[W']`, with `Y_{π(s)} = X_s` for `s ∈ S`.
    pub fn recover_general(
        &self,
        pi: &Permutation,
        answer: &PirAnswer,
        w: usize,
        s: &[usize],
        x_s: &[u32],
    ) -> std::result::Result<u32, PirError> {
        let dec = self.decoder(&PirQuery::Permutation(pi.clone()), &[w], s)?;
        Ok(self.decode(&dec, answer, x_s)?[0])
    }
}

impl PirProtocol for GeneralPirCode {
    type Decoder = GeneralDecoder;

    fn params(&self) -> SchemeParams {
        self.params
    }

    fn field(&self) -> &Field {
        &self.cosets.base.field
    }

    fn mode(&self) -> PrivacyMode {
        PrivacyMode::WPrivate
    }

    fn generate_query(
        &self,
        w: &[usize],
        s: &[usize],
        rng: &mut dyn RngCore,
    ) -> std::result::Result<PirQuery, PirError> {
        Ok(PirQuery::Permutation(self.queries.sample(w, s, rng)?))
    }

    fn query_distribution(&self, w: &[usize], s: &[usize]) -> std::result::Result<Vec<(Rational, PirQuery)>, PirError> {
        let p = Rational::new(1, self.queries.branch_count());
        self.queries
            .branches()
            .iter()
            .map(|c| Ok((p, PirQuery::Permutation(self.queries.assemble(w, s, c)?))))
            .collect()
    }

    fn answer(&self, query: &PirQuery, x: &[u32]) -> std::result::Result<PirAnswer, PirError> {
        match query {
            PirQuery::Permutation(pi) if pi.len() == self.params.k => self.answer_encode(pi, x).map_err(|e| match e {
                GeneralError::Pir(p) => p,
                GeneralError::Field(f) => PirError::Field(f),
                other => PirError::NotASolution(other.to_string()),
            }),
            _ => Err(PirError::QueryMismatch),
        }
    }

    fn decoder(&self, query: &PirQuery, w: &[usize], s: &[usize]) -> std::result::Result<GeneralDecoder, PirError> {
        let SchemeParams { k, m, d, .. } = self.params;
        let (w, s) = normalize_sets(k, d, m, w, s)?;
        let PirQuery::Permutation(pi) = query else {
            return Err(PirError::QueryMismatch);
        };
        if pi.len() != k {
            return Err(PirError::QueryMismatch);
        }
        let target = pi.apply(w[0]);
        let mapped: Vec<usize> = s.iter().map(|&x| pi.apply(x)).collect();
        let side_positions = self.cosets.base.repair[target]
            .group
            .iter()
            .map(|l| mapped.iter().position(|x| x == l).ok_or(PirError::Certificate(w[0])))
            .collect::<std::result::Result<_, _>>()?;
        Ok(GeneralDecoder { target, side_positions })
    }

    fn decode(&self, dec: &GeneralDecoder, answer: &PirAnswer, x_s: &[u32]) -> std::result::Result<Vec<u32>, PirError> {
        let f = self.field();
        if answer.values.len() != self.cosets.t_opt {
            return Err(PirError::Length {
                expected: self.cosets.t_opt,
                got: answer.values.len(),
            });
        }
        if x_s.len() != self.params.m {
            return Err(PirError::Length {
                expected: self.params.m,
                got: x_s.len(),
            });
        }
        for &v in answer.values.iter().chain(x_s) {
            f.check(v)?;
        }
        let a = index_of(&answer.values, f.order()) as usize;
        let u = &self.cosets.translations[a];
        let rf = &self.cosets.base.repair[dec.target];
        let shifted: Vec<u32> = rf
            .group
            .iter()
            .zip(&dec.side_positions)
            .map(|(&l, &p)| f.sub(x_s[p], u[l]))
            .collect();
        let base = rf
            .eval(&shifted)
            .ok_or_else(|| PirError::Undecodable(format!("no codeword matches {shifted:?}")))?;
        Ok(vec![f.add(base, u[dec.target])])
    }

    fn download_symbols(&self) -> usize {
        self.cosets.t_opt
    }
}

/// A decoder `D_j` for one coordinate with its side set `S_j`.
pub struct LocalDecoder<'a> {
    pub side: Vec<usize>,
    #[allow(clippy::type_complexity)]
    pub decode: Box<dyn Fn(&[u32], &[u32]) -> Option<u32> + 'a>,
}

/// Per-coordinate decoders for a fixed permutation query: `S_j` is the
/// preimage under `π` of the padded repair set of `π(j)`.
pub fn decoders_for_query<'a, P: PirProtocol>(
    scheme: &'a P,
    plan: &QueryPlan,
    pi: &Permutation,
) -> std::result::Result<Vec<LocalDecoder<'a>>, PirError> {
    let inv = pi.inverse();
    let query = PirQuery::Permutation(pi.clone());
    (0..scheme.params().k)
        .map(|j| {
            let image = pi.apply(j);
            let repair = plan.repair_set(&[image]).ok_or(PirError::Certificate(j))?;
            let mut side: Vec<usize> = repair.iter().map(|&l| inv.apply(l)).collect();
            side.sort_unstable();
            let dec = scheme.decoder(&query, &[j], &side)?;
            Ok(LocalDecoder {
                side,
                decode: Box::new(move |a: &[u32], xs: &[u32]| {
                    let answer = PirAnswer { values: a.to_vec() };
                    scheme.decode(&dec, &answer, xs).ok().map(|v| v[0])
                }),
            })
        })
        .collect()
}

/// Result of extracting an LRC from a PIR answer map.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// The answer value whose fiber was selected.
    pub answer: Vec<u32>,
    pub lrc: GeneralLrc,
    /// Lower bound `q^(K−T)` on the fiber size.
    pub size_floor: u64,
}

/// Picks the most popular answer value (lexicographically smallest among
/// ties) and returns its fiber as an LRC whose repair groups and functions
/// come from the per-coordinate decoders.
pub fn extract_lrc_from_pir<A>(
    field: &Field,
    k: usize,
    t: usize,
    answer_fn: A,
    decoders: &[LocalDecoder],
) -> Result<Extraction>
where
    A: Fn(&[u32]) -> Vec<u32>,
{
    if t == 0 || t >= k {
        return Err(GeneralError::Parameters(format!("need 0 < T < K (T={t}, K={k})")));
    }
    if decoders.len() != k {
        return Err(GeneralError::Parameters(format!(
            "{} decoders for K={k}",
            decoders.len()
        )));
    }
    for (j, d) in decoders.iter().enumerate() {
        if d.side.contains(&j) || d.side.iter().any(|&s| s >= k) {
            return Err(GeneralError::Parameters(format!(
                "bad side set for coordinate {}",
                j + 1
            )));
        }
    }
    let q = field.order();
    let space = checked_power(q, k)
        .filter(|&s| s <= SPACE_LIMIT)
        .ok_or(GeneralError::Guard {
            what: "database space",
            size: checked_power(q, k).unwrap_or(u64::MAX),
            limit: SPACE_LIMIT,
        })?;
    let mut fibers: HashMap<Vec<u32>, Vec<Vec<u32>>> = HashMap::new();
    for i in 0..space {
        let x = digits_of(i, q, k);
        let a = answer_fn(&x);
        if a.len() != t {
            return Err(GeneralError::Parameters(format!(
                "answer of length {} for T={t}",
                a.len()
            )));
        }
        fibers.entry(a).or_default().push(x);
    }
    let (answer, fiber) = fibers
        .into_iter()
        .max_by(|(a1, f1), (a2, f2)| f1.len().cmp(&f2.len()).then_with(|| a2.cmp(a1)))
        .unwrap();
    let mut groups = Vec::with_capacity(k);
    let mut tables = Vec::with_capacity(k);
    for (j, d) in decoders.iter().enumerate() {
        let mut side = d.side.clone();
        side.sort_unstable();
        let mut table = HashMap::new();
        for x in &fiber {
            let xs = project(x, &side);
            match (d.decode)(&answer, &xs) {
                Some(v) if v == x[j] => {
                    table.insert(xs, v);
                }
                _ => return Err(GeneralError::NoDecoder(j)),
            }
        }
        groups.push(side);
        tables.push(table);
    }
    let lrc = GeneralLrc::new(field, k, fiber, groups)?;
    for (j, table) in tables.into_iter().enumerate() {
        debug_assert_eq!(lrc.repair[j].table, table);
    }
    Ok(Extraction {
        answer,
        lrc,
        size_floor: checked_power(q, k - t).unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::verify_all_symbol_locality;
    use crate::constructions::partition_and_code;
    use crate::matrix::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf2() -> Field {
        field_of_order(2).unwrap()
    }

    /// {000, 111} with R(1) = {2}, R(2) = {1}, R(3) = {2} (one-based).
    fn repetition() -> GeneralLrc {
        GeneralLrc::new(
            &gf2(),
            3,
            vec![vec![0, 0, 0], vec![1, 1, 1]],
            vec![vec![1], vec![0], vec![1]],
        )
        .unwrap()
    }

    fn pac_lrc() -> GeneralLrc {
        let code = LinearCode::from_parity_check(&partition_and_code(6, 2, &gf2()).unwrap());
        let plan = verify_all_symbol_locality(&code, 2).unwrap().into_plan().unwrap();
        GeneralLrc::from_linear(&code, &plan).unwrap()
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_partition(&repetition(), 1).unwrap(), (vec![1], vec![0, 2]));
        assert_eq!(greedy_partition(&pac_lrc(), 2).unwrap(), (vec![1, 2, 4, 5], vec![0, 3]));
        // locality search picks R(3) = {1}; P2 still {1, 3}
        let searched = GeneralLrc::with_locality_search(&gf2(), 3, vec![vec![0, 0, 0], vec![1, 1, 1]], 1).unwrap();
        assert_eq!(searched.repair_function(2).group, vec![0]);
        assert_eq!(greedy_partition(&searched, 1).unwrap(), (vec![1], vec![0, 2]));
        // not optimal for r = 2
        assert!(matches!(
            greedy_partition(&repetition(), 2),
            Err(GeneralError::NonOptimal { .. })
        ));
    }

    #[test]
    fn repetition_cosets() {
        let cs = coset_system(&repetition(), 1).unwrap();
        assert_eq!(
            cs.translations(),
            &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 1], vec![1, 0, 1]]
        );
        let mut cosets: Vec<Vec<Vec<u32>>> = (0..4).map(|j| cs.coset(j)).collect();
        for c in &mut cosets {
            c.sort();
        }
        assert_eq!(cosets[1], vec![vec![0, 1, 1], vec![1, 0, 0]]);
        assert_eq!(cosets[3], vec![vec![0, 1, 0], vec![1, 0, 1]]);
        let mut all: Vec<Vec<u32>> = cosets.concat();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn answer_examples() {
        let code = GeneralPirCode::new(&repetition(), 1).unwrap();
        let id = Permutation::identity(3);
        assert_eq!(code.answer_encode(&id, &[0, 1, 0]).unwrap().values, vec![1, 1]);
        assert_eq!(code.answer_encode(&id, &[1, 1, 1]).unwrap().values, vec![0, 0]);
        let other = Permutation::new(vec![1, 0, 2]).unwrap();
        assert_ne!(
            code.answer_encode(&other, &[0, 1, 0]).unwrap(),
            code.answer_encode(&id, &[0, 1, 0]).unwrap()
        );
    }

    #[test]
    fn recovery_exhaustive_repetition() {
        let code = GeneralPirCode::new(&repetition(), 1).unwrap();
        for xi in 0..8 {
            let x = digits_of(xi, 2, 3);
            for w in 0..3 {
                for s in (0..3).filter(|&s| s != w) {
                    for (_, q) in code.query_distribution(&[w], &[s]).unwrap() {
                        let a = code.answer(&q, &x).unwrap();
                        assert_eq!(code.recover(&q, &a, &[w], &[s], &[x[s]]).unwrap(), vec![x[w]]);
                    }
                }
            }
        }
        // codeword database: zero translation, plain repair
        let id = Permutation::identity(3);
        let a = code.answer_encode(&id, &[1, 1, 1]).unwrap();
        assert_eq!(code.recover_general(&id, &a, 0, &[1], &[1]).unwrap(), 1);
    }

    #[test]
    fn wrap_examples() {
        let rep = repetition();
        let flip = vec![vec![1, 0], vec![0, 1], vec![0, 1]];
        let wrapped = wrap_nonlinear(&rep, &flip).unwrap();
        assert_eq!(wrapped.codewords(), &[vec![0, 1, 1], vec![1, 0, 0]]);
        assert!(wrapped.verify_repair());
        assert_eq!(wrapped.locality(), 1);
        assert!(!wrapped.contains(&[1, 1, 1]));
        assert!(!wrapped.is_linear());
        assert!(rep.is_linear());
        let ident = vec![vec![0, 1]; 3];
        assert_eq!(wrap_nonlinear(&rep, &ident).unwrap(), rep);
        assert_eq!(
            wrap_nonlinear(&rep, &[vec![0, 0], vec![0, 1], vec![0, 1]]).unwrap_err(),
            GeneralError::NotBijection(0)
        );
    }

    #[test]
    fn text_roundtrip() {
        let w = wrap_nonlinear(&repetition(), &[vec![1, 0], vec![0, 1], vec![0, 1]]).unwrap();
        let text = w.to_text();
        assert!(text.starts_with("gcode 3 2 2\n0 1 1\n1 0 0\n1 | 2 | 0:1;1:0\n"));
        assert_eq!(GeneralLrc::parse(&text).unwrap(), w);
        assert!(GeneralLrc::parse(&text.replace("0:1;1:0", "0:0;1:1")).is_err());
        assert!(GeneralLrc::parse("gcode 3 2\n").is_err());
    }

    #[test]
    fn not_functional_groups_rejected() {
        let words = vec![vec![0, 0, 0], vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]];
        assert_eq!(
            GeneralLrc::new(&gf2(), 3, words.clone(), vec![vec![1], vec![0, 2], vec![0, 1]]).unwrap_err(),
            GeneralError::NotFunctional(0)
        );
        assert!(GeneralLrc::new(&gf2(), 3, words, vec![vec![1, 2], vec![0, 2], vec![0, 1]]).is_ok());
    }

    #[test]
    fn encoder_is_a_bijection_on_power_sizes() {
        let lrc = pac_lrc();
        assert_eq!((lrc.len(), lrc.dimension()), (16, 4));
        assert!(lrc.encoder_is_bijective());
        let mut seen = std::collections::HashSet::new();
        for i in 0..16 {
            seen.insert(lrc.encode(&digits_of(i, 2, 4)).unwrap());
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn extraction_from_pac_answer_map() {
        let f2 = gf2();
        let e = partition_and_code(6, 2, &f2).unwrap();
        let scheme = crate::pir_linear::PirScheme::pac(6, 2, &f2).unwrap();
        let id = Permutation::identity(6);
        let decs = decoders_for_query(&scheme, scheme.query_plan().unwrap(), &id).unwrap();
        let ext = extract_lrc_from_pir(&f2, 6, 2, |x| e.mul_vec(x).unwrap(), &decs).unwrap();
        assert_eq!(ext.answer, vec![0, 0]);
        assert_eq!((ext.lrc.len(), ext.size_floor), (16, 16));
        assert!(ext.lrc.verify_repair());
        let code = LinearCode::from_parity_check(&e);
        assert!(ext.lrc.codewords().iter().all(|w| code.contains(w).unwrap()));
        assert!(extract_lrc_from_pir(&f2, 6, 0, |_| vec![], &decs).is_err());
    }

    #[test]
    fn sampled_general_queries_recover() {
        let lrc = pac_lrc();
        let code = GeneralPirCode::new(&lrc, 2).unwrap();
        assert_eq!(code.download_symbols(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = [1, 0, 1, 1, 1, 0];
        let q = code.generate_query(&[3], &[0, 5], &mut rng).unwrap();
        let a = code.answer(&q, &x).unwrap();
        assert_eq!(code.recover(&q, &a, &[3], &[0, 5], &[1, 0]).unwrap(), vec![1]);
        let _ = Matrix::identity(&gf2(), 1);
    }
}
