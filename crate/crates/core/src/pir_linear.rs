//! Scalar-linear PIR-SI schemes.
//!
//! A W-private scheme is built from a code with (cooperative) locality `M`.
//! The server holds the code's parity check `H`; for a permutation query `π`
//! it answers with `E·X` where `E_i = H_{π(i)}`. A (W,S)-private scheme uses
//! a parity check whose every `K−M` columns are independent and a constant
//! query. Recovery is decided by row-space membership on `E`.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::codes::{cooperative_locality, pad_set, verify_all_symbol_locality, CodeError, LinearCode, RepairPlan};
use crate::combinat::{binomial, complement, subsets};
use crate::constructions::{grs_mds_parity_check, partition_and_code, ConstructionError};
use crate::field::{Field, FieldError};
use crate::matrix::{push_forward, Matrix, MatrixError};
use crate::query::{normalize_sets, PirQuery, QueryError, QueryPlan};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PirError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("column {} of the solution matrix is all zero; that message can never be recovered privately", .0 + 1)]
    ZeroColumn(usize),
    #[error("matrix is not a valid solution: {0}")]
    NotASolution(String),
    #[error("no decoding vector for demanded index {}", .0 + 1)]
    Certificate(usize),
    #[error("side information is inconsistent with every codeword: {0}")]
    Undecodable(String),
    #[error("query does not belong to this scheme")]
    QueryMismatch,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("malformed answer text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PirError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrivacyMode {
    /// Hides the demand set only.
    WPrivate,
    /// Hides demand and side-information sets.
    WsPrivate,
}

impl fmt::Display for PrivacyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrivacyMode::WPrivate => "W",
            PrivacyMode::WsPrivate => "WS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub q: u32,
}

/// Server reply: `T` field symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PirAnswer {
    pub values: Vec<u32>,
}

impl PirAnswer {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
    }

    pub fn parse(text: &str, field: &Field) -> Result<Self> {
        let values = text
            .split_whitespace()
            .map(|t| {
                let v: u32 = t.parse().map_err(|_| PirError::Parse(t.to_string()))?;
                Ok(field.check(v)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PirAnswer { values })
    }
}

/// The operations every PIR-SI scheme exposes to clients, servers and audits.
pub trait PirProtocol {
    type Decoder;

    fn params(&self) -> SchemeParams;
    fn field(&self) -> &Field;
    fn mode(&self) -> PrivacyMode;

    /// Samples a query for demand `w` and side set `s`.
    fn generate_query(&self, w: &[usize], s: &[usize], rng: &mut dyn RngCore) -> Result<PirQuery>;

    /// Exact distribution of [`PirProtocol::generate_query`] for `(w, s)`.
    fn query_distribution(&self, w: &[usize], s: &[usize]) -> Result<Vec<(Rational, PirQuery)>>;

    fn answer(&self, query: &PirQuery, x: &[u32]) -> Result<PirAnswer>;

    /// Everything the client needs to decode, derived from the query alone.
    fn decoder(&self, query: &PirQuery, w: &[usize], s: &[usize]) -> Result<Self::Decoder>;

    /// Demanded values in ascending order of `w`; `x_s` follows ascending `s`.
    fn decode(&self, decoder: &Self::Decoder, answer: &PirAnswer, x_s: &[u32]) -> Result<Vec<u32>>;

    /// Downloaded symbols per query (`T_effective`).
    fn download_symbols(&self) -> usize;

    /// Matrix `E` for linear schemes (used by the (W,S) audit).
    fn solution_matrix(&self) -> Option<&Matrix> {
        None
    }

    fn recover(&self, query: &PirQuery, answer: &PirAnswer, w: &[usize], s: &[usize], x_s: &[u32]) -> Result<Vec<u32>> {
        let dec = self.decoder(query, w, s)?;
        self.decode(&dec, answer, x_s)
    }
}

/// A scalar-linear PIR-SI scheme.
#[derive(Debug, Clone)]
pub struct PirScheme {
    params: SchemeParams,
    mode: PrivacyMode,
    code: LinearCode,
    plan: Option<RepairPlan>,
    queries: Option<QueryPlan>,
}

/// Per-index decoding vectors: `X_w = (u·A − Σ_{j∈S} v_j X_j) / v_w`.
#[derive(Debug, Clone)]
pub struct LinearDecoder {
    demand: Vec<usize>,
    side: Vec<usize>,
    steps: Vec<DecodeStep>,
}

#[derive(Debug, Clone)]
struct DecodeStep {
    u: Vec<u32>,
    side_weights: Vec<u32>,
    pivot_inv: u32,
}

impl LinearDecoder {
    pub fn demand(&self) -> &[usize] {
        &self.demand
    }

    pub fn side(&self) -> &[usize] {
        &self.side
    }
}

fn check_field_values(field: &Field, x: &[u32], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(PirError::Length { expected, got: x.len() });
    }
    for &v in x {
        field.check(v)?;
    }
    Ok(())
}

impl PirScheme {
    /// Single-message W-private scheme from a code with all-symbol locality `m`.
    pub fn from_lrc(code: &LinearCode, m: usize) -> Result<Self> {
        Self::from_cooperative_lrc(code, m, 1)
    }

    /// W-private scheme for `d` demanded messages from a code with
    /// `(r = m, ℓ = d)`-cooperative locality (plain locality when `d = 1`).
    pub fn from_cooperative_lrc(code: &LinearCode, m: usize, d: usize) -> Result<Self> {
        let k = code.n();
        if d == 0 || d + m > k {
            return Err(PirError::Parameters(format!(
                "need D >= 1 and D + M <= K (K={k}, M={m}, D={d})"
            )));
        }
        if let Some(c) = code.parity_check().zero_columns().first() {
            return Err(PirError::ZeroColumn(*c));
        }
        let (plan, queries) = if d == 1 {
            let check = verify_all_symbol_locality(code, m)?;
            let missing = check.missing();
            let plan = check.into_plan().ok_or_else(|| {
                PirError::NotASolution(format!(
                    "no repair group of size <= {m} for coordinates {:?}",
                    missing.iter().map(|i| i + 1).collect::<Vec<_>>()
                ))
            })?;
            let queries = QueryPlan::new(k, 1, m, |wp| plan.group(wp[0]).padded(k, m).members)?;
            (plan, queries)
        } else {
            let check = cooperative_locality(code, m, d)?;
            let failures = check.failures();
            let coop = check.into_plan().ok_or_else(|| {
                PirError::NotASolution(format!(
                    "no cooperative repair set of size <= {m} for {} erased sets",
                    failures.len()
                ))
            })?;
            let queries = QueryPlan::new(k, d, m, |wp| pad_set(k, wp, coop.gamma(wp).unwrap_or(&[]), m))?;
            let plan = RepairPlan::new(k, m, Vec::new()).with_cooperative(coop);
            (plan, queries)
        };
        Ok(PirScheme {
            params: SchemeParams {
                k,
                m,
                d,
                q: code.field().order(),
            },
            mode: PrivacyMode::WPrivate,
            code: code.clone(),
            plan: Some(plan),
            queries: Some(queries),
        })
    }

    /// Partition-and-Code scheme.
    pub fn pac(k: usize, m: usize, field: &Field) -> Result<Self> {
        let e = partition_and_code(k, m, field)?;
        Self::from_lrc(&LinearCode::from_parity_check(&e), m)
    }

    /// (W,S)-private scheme on `h`; every `K−M` columns must be independent.
    pub fn ws_private(h: &Matrix, m: usize, d: usize) -> Result<Self> {
        let scheme = Self::ws_private_unchecked(h, m, d)?;
        let k = h.cols();
        for cols in subsets(k, k - m) {
            if h.select_columns(&cols)?.rank() < k - m {
                let s = complement(k, &cols);
                return Err(PirError::NotASolution(format!(
                    "columns outside S = {:?} are dependent",
                    s.iter().map(|i| i + 1).collect::<Vec<_>>()
                )));
            }
        }
        Ok(scheme)
    }

    /// (W,S)-private scheme without the column-independence check, for
    /// exercising the auditors on broken matrices.
    pub fn ws_private_unchecked(h: &Matrix, m: usize, d: usize) -> Result<Self> {
        let k = h.cols();
        if d == 0 || d + m > k {
            return Err(PirError::Parameters(format!(
                "need D >= 1 and D + M <= K (K={k}, M={m}, D={d})"
            )));
        }
        Ok(PirScheme {
            params: SchemeParams {
                k,
                m,
                d,
                q: h.field().order(),
            },
            mode: PrivacyMode::WsPrivate,
            code: LinearCode::from_parity_check(h),
            plan: None,
            queries: None,
        })
    }

    /// (W,S)-private scheme on the Vandermonde MDS parity check.
    pub fn grs(k: usize, m: usize, d: usize, field: &Field) -> Result<Self> {
        Self::ws_private(&grs_mds_parity_check(k, m, field)?, m, d)
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    /// The stored parity check `H` (full rank).
    pub fn parity_check(&self) -> &Matrix {
        self.code.parity_check()
    }

    pub fn plan(&self) -> Option<&RepairPlan> {
        self.plan.as_ref()
    }

    pub fn query_plan(&self) -> Option<&QueryPlan> {
        self.queries.as_ref()
    }

    /// `E` for a query: `E_i = H_{π(i)}`, or `H` itself for the constant query.
    pub fn solution_for(&self, query: &PirQuery) -> Result<Matrix> {
        match (self.mode, query) {
            (PrivacyMode::WPrivate, PirQuery::Permutation(pi)) if pi.len() == self.params.k => {
                Ok(self.parity_check().permute_columns(pi)?)
            }
            (PrivacyMode::WsPrivate, PirQuery::Constant) => Ok(self.parity_check().clone()),
            _ => Err(PirError::QueryMismatch),
        }
    }
}

impl PirProtocol for PirScheme {
    type Decoder = LinearDecoder;

    fn params(&self) -> SchemeParams {
        self.params
    }

    fn field(&self) -> &Field {
        self.code.field()
    }

    fn mode(&self) -> PrivacyMode {
        self.mode
    }

    fn generate_query(&self, w: &[usize], s: &[usize], rng: &mut dyn RngCore) -> Result<PirQuery> {
        let SchemeParams { k, m, d, .. } = self.params;
        normalize_sets(k, d, m, w, s)?;
        match &self.queries {
            Some(plan) => Ok(PirQuery::Permutation(plan.sample(w, s, rng)?)),
            None => Ok(PirQuery::Constant),
        }
    }

    fn query_distribution(&self, w: &[usize], s: &[usize]) -> Result<Vec<(Rational, PirQuery)>> {
        let SchemeParams { k, m, d, .. } = self.params;
        normalize_sets(k, d, m, w, s)?;
        match &self.queries {
            Some(plan) => {
                let p = Rational::new(1, plan.branch_count());
                plan.branches()
                    .iter()
                    .map(|c| Ok((p, PirQuery::Permutation(plan.assemble(w, s, c)?))))
                    .collect()
            }
            None => Ok(vec![(Rational::from_integer(1), PirQuery::Constant)]),
        }
    }

    fn answer(&self, query: &PirQuery, x: &[u32]) -> Result<PirAnswer> {
        check_field_values(self.field(), x, self.params.k)?;
        let h = self.parity_check();
        let values = match (self.mode, query) {
            // E·X = H·Y with Y_{π(i)} = X_i
            (PrivacyMode::WPrivate, PirQuery::Permutation(pi)) if pi.len() == self.params.k => {
                h.mul_vec(&push_forward(x, pi))?
            }
            (PrivacyMode::WsPrivate, PirQuery::Constant) => h.mul_vec(x)?,
            _ => return Err(PirError::QueryMismatch),
        };
        Ok(PirAnswer { values })
    }

    fn decoder(&self, query: &PirQuery, w: &[usize], s: &[usize]) -> Result<LinearDecoder> {
        let SchemeParams { k, m, d, .. } = self.params;
        let (w, s) = normalize_sets(k, d, m, w, s)?;
        let e = self.solution_for(query)?;
        let f = self.field();
        let mut ws = w.clone();
        ws.extend_from_slice(&s);
        let outside = complement(k, &ws);
        // columns: outside first, then the demand
        let mut cols = outside.clone();
        cols.extend_from_slice(&w);
        let sub = e.select_columns(&cols)?;
        let mut steps = Vec::with_capacity(w.len());
        for (j, &target) in w.iter().enumerate() {
            let mut want = vec![0; cols.len()];
            want[outside.len() + j] = 1;
            let cert = sub.row_space_membership(&want)?;
            if !cert.member {
                return Err(PirError::Certificate(target));
            }
            let v = e.vec_mul(&cert.coefficients)?;
            debug_assert!(outside.iter().all(|&o| v[o] == 0));
            steps.push(DecodeStep {
                side_weights: s.iter().map(|&i| v[i]).collect(),
                pivot_inv: f.inv(v[target]).ok_or(PirError::Certificate(target))?,
                u: cert.coefficients,
            });
        }
        Ok(LinearDecoder {
            demand: w,
            side: s,
            steps,
        })
    }

    fn decode(&self, dec: &LinearDecoder, answer: &PirAnswer, x_s: &[u32]) -> Result<Vec<u32>> {
        let f = self.field();
        check_field_values(f, x_s, dec.side.len())?;
        check_field_values(f, &answer.values, self.download_symbols())?;
        Ok(dec
            .steps
            .iter()
            .map(|st| {
                let ua =
                    st.u.iter()
                        .zip(&answer.values)
                        .fold(0, |acc, (&u, &a)| f.add(acc, f.mul(u, a)));
                let side = st
                    .side_weights
                    .iter()
                    .zip(x_s)
                    .fold(0, |acc, (&v, &x)| f.add(acc, f.mul(v, x)));
                f.mul(f.sub(ua, side), st.pivot_inv)
            })
            .collect())
    }

    fn download_symbols(&self) -> usize {
        self.parity_check().rows()
    }

    fn solution_matrix(&self) -> Option<&Matrix> {
        Some(self.parity_check())
    }
}

/// What [`pir_to_lrc`] verified about the extracted code.
#[derive(Debug, Clone)]
pub struct TransformReport {
    pub property: String,
    pub plan: Option<RepairPlan>,
}

/// Reads a solution matrix `E` as a parity check and verifies the code it
/// defines: locality `M` (`D = 1`), `(M, D)`-cooperative locality (`D ≥ 2`),
/// or the `(K, M)` MDS property for (W,S)-private solutions.
pub fn pir_to_lrc(e: &Matrix, m: usize, d: usize, mode: PrivacyMode) -> Result<(LinearCode, TransformReport)> {
    if let Some(&c) = e.zero_columns().first() {
        return Err(PirError::ZeroColumn(c));
    }
    let k = e.cols();
    if d == 0 || d + m > k {
        return Err(PirError::Parameters(format!(
            "need D >= 1 and D + M <= K (K={k}, M={m}, D={d})"
        )));
    }
    let code = LinearCode::from_parity_check(e);
    let report = match mode {
        PrivacyMode::WPrivate if d == 1 => {
            let check = verify_all_symbol_locality(&code, m)?;
            let missing = check.missing();
            let plan = check.into_plan().ok_or_else(|| {
                PirError::NotASolution(format!(
                    "coordinates {:?} have no repair group of size <= {m}",
                    missing.iter().map(|i| i + 1).collect::<Vec<_>>()
                ))
            })?;
            TransformReport {
                property: format!("all-symbol locality {m}"),
                plan: Some(plan),
            }
        }
        PrivacyMode::WPrivate => {
            let check = cooperative_locality(&code, m, d)?;
            if !check.holds() {
                return Err(PirError::NotASolution(format!(
                    "{} erased {d}-sets have no repair set of size <= {m}",
                    check.failures().len()
                )));
            }
            TransformReport {
                property: format!("({m},{d})-cooperative locality"),
                plan: Some(RepairPlan::new(k, m, Vec::new()).with_cooperative(check.into_plan().unwrap())),
            }
        }
        PrivacyMode::WsPrivate => {
            if code.k() != m {
                return Err(PirError::NotASolution(format!(
                    "null space has dimension {}, expected {m}",
                    code.k()
                )));
            }
            if m > 0 && code.min_distance()? != k - m + 1 {
                return Err(PirError::NotASolution(format!(
                    "minimum distance {} below the MDS value {}",
                    code.min_distance()?,
                    k - m + 1
                )));
            }
            TransformReport {
                property: format!("({k},{m}) MDS"),
                plan: None,
            }
        }
    };
    Ok((code, report))
}

/// Scalar-linear download floor for a single message: `⌈K/(M+1)⌉`.
pub fn single_message_floor(k: usize, m: usize) -> usize {
    k.div_ceil(m + 1)
}

/// Number of `(W, S)` pairs with the declared sizes.
pub fn pair_count(k: usize, m: usize, d: usize) -> u64 {
    binomial(k, d) * binomial(k - d, m)
}
