//! Exact audits: recoverability, W-privacy, (W,S)-privacy and rate.
//!
//! Privacy audits never sample. Every RNG branch of the query generator is
//! enumerated and weighted with exact rationals, and side sets are weighted
//! with the conditional law `P(S | W)` derived by Bayes from a uniform side
//! set and a uniform demand set outside it.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinat::{binomial, checked_power, complement, digits_of, factorial, subsets};
use crate::pir_linear::{PirError, PirProtocol, PrivacyMode, SchemeParams};
use crate::query::PirQuery;
use crate::Rational;

/// Largest number of databases enumerated by [`DatabaseDomain::All`].
pub const DATABASE_LIMIT: u64 = 1 << 20;
/// Largest `K` accepted by the W-privacy audit (`K! ≤ 10^7`).
pub const PRIVACY_MAX_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Pir(#[from] PirError),
    #[error("{what} of size {size} exceeds the limit {limit}")]
    Guard { what: &'static str, size: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, AuditError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    Recoverability,
    WPrivacy,
    WsPrivacy,
    Rate,
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditKind::Recoverability => "recoverability",
            AuditKind::WPrivacy => "w_privacy",
            AuditKind::WsPrivacy => "ws_privacy",
            AuditKind::Rate => "rate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub kind: AuditKind,
    pub pass: bool,
    /// Ordered `key=value` counters.
    pub detail: Vec<(String, String)>,
    pub measured_rate: Option<Rational>,
    pub bound: Option<Rational>,
    /// For privacy audits: the query law for the first demand set.
    pub query_distribution: Option<BTreeMap<PirQuery, Rational>>,
}

impl AuditReport {
    fn new(kind: AuditKind) -> Self {
        AuditReport {
            kind,
            pass: true,
            detail: Vec::new(),
            measured_rate: None,
            bound: None,
            query_distribution: None,
        }
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.detail.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.detail.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Machine-readable `key=value` lines ending in `result=PASS|FAIL`.
    pub fn render(&self) -> String {
        let mut s = format!("audit={}\n", self.kind);
        for (k, v) in &self.detail {
            let _ = writeln!(s, "{k}={v}");
        }
        if let Some(r) = self.measured_rate {
            let _ = writeln!(s, "measured_rate={r}");
        }
        if let Some(b) = self.bound {
            let _ = writeln!(s, "bound={b}");
        }
        if let Some(dist) = &self.query_distribution {
            let _ = writeln!(s, "support={}", dist.len());
            let mut probs: Vec<Rational> = dist.values().copied().collect();
            probs.dedup();
            if probs.len() == 1 {
                let _ = writeln!(s, "p = {}", probs[0]);
            }
        }
        let _ = writeln!(s, "result={}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

/// Which databases the recoverability audit visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatabaseDomain {
    All,
    Sample { n: usize, seed: u64 },
}

/// Which queries are decoded for each `(W, S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryCoverage {
    /// `count` queries drawn from a `ChaCha8Rng` seeded with `seed`.
    Sampled { count: usize, seed: u64 },
    /// Every query in the support of the generator.
    Exhaustive,
}

fn databases(params: SchemeParams, domain: DatabaseDomain) -> Result<Vec<Vec<u32>>> {
    let SchemeParams { k, q, .. } = params;
    match domain {
        DatabaseDomain::All => {
            let total = checked_power(q, k)
                .filter(|&t| t <= DATABASE_LIMIT)
                .ok_or(AuditError::Guard {
                    what: "database space",
                    size: checked_power(q, k).unwrap_or(u64::MAX),
                    limit: DATABASE_LIMIT,
                })?;
            Ok((0..total).map(|i| digits_of(i, q, k)).collect())
        }
        DatabaseDomain::Sample { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| (0..k).map(|_| rng.gen_range(0..q)).collect()).collect())
        }
    }
}

/// A demand set and a side set.
pub type DemandSide = (Vec<usize>, Vec<usize>);

/// Every `(W, S)` with `|W| = D`, `|S| = M`, both ascending.
pub fn demand_side_pairs(k: usize, d: usize, m: usize) -> Vec<DemandSide> {
    let mut out = Vec::new();
    for w in subsets(k, d) {
        let rest = complement(k, &w);
        for s in crate::combinat::subsets_of(&rest, m) {
            out.push((w.clone(), s));
        }
    }
    out
}

fn workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// Splits `items` into contiguous chunks, runs `f` on each in its own thread
/// and returns the results in input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(workers()).max(1);
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(|| c.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("audit worker panicked"))
            .collect()
    })
}

#[derive(Default)]
struct PairOutcome {
    queries: u64,
    recoveries: u64,
    failures: u64,
    first_failure: Option<String>,
}

/// Decodes every demand from every database in `domain`, for every `(W, S)`
/// and one seeded query per pair.
pub fn audit_recoverability<P>(scheme: &P, domain: DatabaseDomain) -> Result<AuditReport>
where
    P: PirProtocol + Sync,
{
    audit_recoverability_with(scheme, domain, QueryCoverage::Sampled { count: 1, seed: 0 })
}

pub fn audit_recoverability_with<P>(scheme: &P, domain: DatabaseDomain, coverage: QueryCoverage) -> Result<AuditReport>
where
    P: PirProtocol + Sync,
{
    let params = scheme.params();
    let dbs = databases(params, domain)?;
    let pairs = demand_side_pairs(params.k, params.d, params.m);
    let indexed: Vec<(usize, &DemandSide)> = pairs.iter().enumerate().collect();
    let outcomes = parallel_map(&indexed, |&(idx, (w, s))| -> Result<PairOutcome> {
        let queries: Vec<PirQuery> = match coverage {
            QueryCoverage::Exhaustive => scheme.query_distribution(w, s)?.into_iter().map(|(_, q)| q).collect(),
            QueryCoverage::Sampled { count, seed } => {
                // one stream per pair so the result does not depend on scheduling
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
                (0..count)
                    .map(|_| scheme.generate_query(w, s, &mut rng))
                    .collect::<std::result::Result<_, _>>()?
            }
        };
        let mut out = PairOutcome::default();
        for q in &queries {
            out.queries += 1;
            let note = |out: &mut PairOutcome, why: String| {
                out.first_failure
                    .get_or_insert_with(|| format!("W={} S={} query={} {why}", one_based(w), one_based(s), q));
            };
            let dec = match scheme.decoder(q, w, s) {
                Ok(d) => d,
                Err(e) => {
                    out.recoveries += dbs.len() as u64;
                    out.failures += dbs.len() as u64;
                    note(&mut out, e.to_string());
                    continue;
                }
            };
            for x in &dbs {
                out.recoveries += 1;
                let x_s: Vec<u32> = s.iter().map(|&i| x[i]).collect();
                let want: Vec<u32> = w.iter().map(|&i| x[i]).collect();
                let why = match scheme.answer(q, x).and_then(|a| scheme.decode(&dec, &a, &x_s)) {
                    Ok(got) if got == want => continue,
                    Ok(got) => format!("X={x:?} got {got:?} want {want:?}"),
                    Err(e) => format!("X={x:?} {e}"),
                };
                out.failures += 1;
                note(&mut out, why);
            }
        }
        Ok(out)
    });
    let mut report = AuditReport::new(AuditKind::Recoverability);
    let (mut queries, mut recoveries, mut failures, mut first) = (0, 0, 0, None);
    for o in outcomes {
        let o = o?;
        queries += o.queries;
        recoveries += o.recoveries;
        failures += o.failures;
        if first.is_none() {
            first = o.first_failure;
        }
    }
    report.note("pairs", pairs.len());
    report.note("databases", dbs.len());
    report.note("queries", queries);
    report.note("recoveries", recoveries);
    report.note("failures", failures);
    if let Some(f) = first {
        report.note("first_failure", f);
    }
    report.pass = failures == 0;
    Ok(report)
}

fn one_based(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// `P(S | W)` for every `M`-subset `S`, from `p_S` uniform over `M`-subsets
/// of `[K]` and `p_{W|S}` uniform over `D`-subsets of `[K]∖S`.
pub fn side_posterior(k: usize, d: usize, m: usize, w: &[usize]) -> Vec<(Vec<usize>, Rational)> {
    let p_s = Rational::new(1, binomial(k, m));
    let p_w_given_s = Rational::new(1, binomial(k - m, d));
    let joint: Vec<(Vec<usize>, Rational)> = subsets(k, m)
        .map(|s| {
            let p = if s.iter().any(|i| w.contains(i)) {
                Rational::from_integer(0)
            } else {
                p_s * p_w_given_s
            };
            (s, p)
        })
        .collect();
    let p_w: Rational = joint.iter().map(|(_, p)| *p).sum();
    joint
        .into_iter()
        .filter(|(_, p)| *p != Rational::from_integer(0))
        .map(|(s, p)| (s, p / p_w))
        .collect()
}

/// Exact law of the query given `W`, marginalized over `S`.
pub fn query_law<P: PirProtocol>(scheme: &P, w: &[usize]) -> Result<BTreeMap<PirQuery, Rational>> {
    let SchemeParams { k, m, d, .. } = scheme.params();
    let mut law: BTreeMap<PirQuery, Rational> = BTreeMap::new();
    for (s, ps) in side_posterior(k, d, m, w) {
        for (pq, q) in scheme.query_distribution(w, &s)? {
            *law.entry(q).or_insert_with(|| Rational::from_integer(0)) += ps * pq;
        }
    }
    Ok(law)
}

/// Passes iff the query law is the same for every demand set and, for
/// permutation queries, uniform over all `K!` permutations.
pub fn audit_w_privacy<P>(scheme: &P) -> Result<AuditReport>
where
    P: PirProtocol + Sync,
{
    let SchemeParams { k, d, .. } = scheme.params();
    if k > PRIVACY_MAX_K {
        return Err(AuditError::Guard {
            what: "K",
            size: k as u64,
            limit: PRIVACY_MAX_K as u64,
        });
    }
    let demands: Vec<Vec<usize>> = subsets(k, d).collect();
    let laws = parallel_map(&demands, |w| query_law(scheme, w))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut report = AuditReport::new(AuditKind::WPrivacy);
    let reference = &laws[0];
    let one = Rational::from_integer(1);
    let total: Rational = reference.values().copied().sum();
    let differing = demands
        .iter()
        .zip(&laws)
        .find(|(_, l)| *l != reference)
        .map(|(w, _)| w.clone());
    let constant = reference.keys().all(|q| matches!(q, PirQuery::Constant));
    let uniform_p = Rational::new(1, factorial(k));
    let uniform = reference.len() as u64 == factorial(k) && reference.values().all(|&p| p == uniform_p);
    report.note("demand_sets", demands.len());
    report.note("support", reference.len());
    report.note("total_probability", total);
    report.note("identical_across_demands", differing.is_none());
    if let Some(w) = &differing {
        report.note("differing_demand", one_based(w));
    }
    if constant {
        report.note("query", "const");
    } else {
        report.note(
            "uniform",
            format!("1/{} : {}", factorial(k), if uniform { "PASS" } else { "FAIL" }),
        );
    }
    if let Some((q, p)) = reference.iter().max_by_key(|(_, p)| **p) {
        report.note("max_mass", format!("{p} on {q}"));
    }
    report.pass = total == one && differing.is_none() && (constant || uniform);
    report.query_distribution = Some(reference.clone());
    Ok(report)
}

/// Checks that the query is constant over all `(W, S)` and that every `K−M`
/// columns of `E` are independent, naming the first `S` that breaks it.
pub fn audit_ws_privacy<P>(scheme: &P) -> Result<AuditReport>
where
    P: PirProtocol,
{
    let SchemeParams { k, m, d, .. } = scheme.params();
    let mut report = AuditReport::new(AuditKind::WsPrivacy);
    report.note("mode", scheme.mode());
    if scheme.mode() != PrivacyMode::WsPrivate {
        report.pass = false;
        return Ok(report);
    }
    let mut queries = BTreeMap::new();
    for (w, s) in demand_side_pairs(k, d, m) {
        for (p, q) in scheme.query_distribution(&w, &s)? {
            *queries.entry(q).or_insert_with(|| Rational::from_integer(0)) += p;
        }
    }
    let constant = queries.len() == 1;
    report.note("constant_query", constant);
    let Some(e) = scheme.solution_matrix() else {
        report.note("solution_matrix", "missing");
        report.pass = false;
        return Ok(report);
    };
    let mut checked = 0u64;
    let mut offending = None;
    for cols in subsets(k, k - m) {
        checked += 1;
        if e.select_columns(&cols).map_err(PirError::from)?.rank() < k - m {
            offending = Some(complement(k, &cols));
            break;
        }
    }
    report.note("column_sets_checked", checked);
    if let Some(s) = &offending {
        report.note("offending_side_set", one_based(s));
    }
    report.pass = constant && offending.is_none();
    report.query_distribution = Some(queries.into_keys().map(|q| (q, Rational::from_integer(1))).collect());
    Ok(report)
}

/// The rate bound that applies to the scheme's parameters.
pub fn rate_bound(params: SchemeParams, mode: PrivacyMode) -> Rational {
    let SchemeParams { k, m, d, .. } = params;
    let (num, den) = match mode {
        PrivacyMode::WsPrivate => (d, k - m),
        PrivacyMode::WPrivate if d == 1 => (1, k.div_ceil(m + 1)),
        PrivacyMode::WPrivate if d <= m => (d, (d * k).div_ceil(m + d)),
        PrivacyMode::WPrivate => (d, k - m),
    };
    Rational::new(num as u64, den as u64)
}

/// `D / T_effective` against the applicable bound. `T_effective` is the rank
/// of `E` for linear schemes and the answer length otherwise.
pub fn measure_rate<P: PirProtocol>(scheme: &P) -> AuditReport {
    let params = scheme.params();
    let t = match scheme.solution_matrix() {
        Some(e) => e.rank(),
        None => scheme.download_symbols(),
    };
    let mut report = AuditReport::new(AuditKind::Rate);
    let rate = Rational::new(params.d as u64, t as u64);
    let bound = rate_bound(params, scheme.mode());
    report.note("k", params.k);
    report.note("m", params.m);
    report.note("d", params.d);
    report.note("t_effective", t);
    report.note(
        "relation",
        if rate == bound {
            "equality"
        } else if rate < bound {
            "strict"
        } else {
            "violated"
        },
    );
    report.measured_rate = Some(rate);
    report.bound = Some(bound);
    report.pass = rate <= bound;
    report
}
