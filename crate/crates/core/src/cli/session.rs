//! Scheme registry, database files and the client/server session.
//!
//! A session is: hello (both sides echo the configuration line), one query,
//! one answer. The client logs every frame to a transcript; the in-process
//! demo and the socket client share [`run_client`], so the same
//! configuration and seed give byte-identical transcripts.

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::frame::{read_frame, write_frame, Frame, FrameDecoder, FrameError, FrameType};
use crate::codes::{verify_all_symbol_locality, LinearCode};
use crate::constructions::{partition_and_code, simplex_code};
use crate::field::{field_of_order, Field, FieldError};
use crate::pir_general::{GeneralDecoder, GeneralError, GeneralLrc, GeneralPirCode};
use crate::pir_linear::{LinearDecoder, PirAnswer, PirError, PirProtocol, PirScheme, PrivacyMode, SchemeParams};
use crate::query::PirQuery;
use crate::Rational;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Pir(#[from] PirError),
    #[error(transparent)]
    General(#[from] GeneralError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed database file: {0}")]
    Database(String),
    #[error("server error: {0}")]
    Remote(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, SessionError>;

/// Named scheme families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeId {
    /// Partition-and-Code.
    Pac,
    /// The binary (7,3) simplex code read through its 4×7 parity check.
    Simplex7,
    /// Vandermonde MDS parity check, (W,S)-private.
    Grs,
    /// Translates of the Partition-and-Code LRC.
    CosetPac,
}

impl SchemeId {
    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Pac => "pac",
            SchemeId::Simplex7 => "simplex7",
            SchemeId::Grs => "grs",
            SchemeId::CosetPac => "coset-pac",
        }
    }

    pub fn mode(self) -> PrivacyMode {
        match self {
            SchemeId::Grs => PrivacyMode::WsPrivate,
            _ => PrivacyMode::WPrivate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub scheme: SchemeId,
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub q: u32,
}

impl SessionConfig {
    /// The configuration line exchanged in hello frames.
    pub fn describe(&self) -> String {
        format!(
            "scheme={} k={} m={} d={} q={} mode={}",
            self.scheme.name(),
            self.k,
            self.m,
            self.d,
            self.q,
            self.scheme.mode()
        )
    }

    pub fn build(&self) -> Result<AnyScheme> {
        let field = field_of_order(self.q)?;
        let SessionConfig { k, m, d, .. } = *self;
        let need_single = || {
            if d == 1 {
                Ok(())
            } else {
                Err(SessionError::Config(format!(
                    "scheme {} serves one message (D=1)",
                    self.scheme.name()
                )))
            }
        };
        Ok(match self.scheme {
            SchemeId::Pac => {
                need_single()?;
                AnyScheme::Linear(PirScheme::pac(k, m, &field)?)
            }
            SchemeId::Simplex7 => {
                if (k, self.q) != (7, 2) {
                    return Err(SessionError::Config("simplex7 needs K=7 and q=2".into()));
                }
                AnyScheme::Linear(PirScheme::from_cooperative_lrc(&simplex_code(3).unwrap(), m, d)?)
            }
            SchemeId::Grs => AnyScheme::Linear(PirScheme::grs(k, m, d, &field)?),
            SchemeId::CosetPac => {
                need_single()?;
                AnyScheme::General(coset_pac(k, m, &field)?)
            }
        })
    }
}

/// General coset PIR code on the Partition-and-Code LRC.
pub fn coset_pac(k: usize, m: usize, field: &Field) -> Result<GeneralPirCode> {
    let code = LinearCode::from_parity_check(&partition_and_code(k, m, field).map_err(PirError::from)?);
    let plan = verify_all_symbol_locality(&code, m)
        .map_err(PirError::from)?
        .into_plan()
        .ok_or_else(|| SessionError::Config("partition-and-code lost its locality".into()))?;
    let lrc = GeneralLrc::from_linear(&code, &plan)?;
    Ok(GeneralPirCode::new(&lrc, m)?)
}

/// Either kind of scheme behind one protocol.
#[derive(Debug, Clone)]
pub enum AnyScheme {
    Linear(PirScheme),
    General(GeneralPirCode),
}

#[derive(Debug, Clone)]
pub enum AnyDecoder {
    Linear(LinearDecoder),
    General(GeneralDecoder),
}

macro_rules! both {
    ($self:expr, $s:ident => $e:expr) => {
        match $self {
            AnyScheme::Linear($s) => $e,
            AnyScheme::General($s) => $e,
        }
    };
}

impl PirProtocol for AnyScheme {
    type Decoder = AnyDecoder;

    fn params(&self) -> SchemeParams {
        both!(self, s => s.params())
    }

    fn field(&self) -> &Field {
        both!(self, s => s.field())
    }

    fn mode(&self) -> PrivacyMode {
        both!(self, s => s.mode())
    }

    fn generate_query(&self, w: &[usize], s: &[usize], rng: &mut dyn RngCore) -> crate::pir_linear::Result<PirQuery> {
        both!(self, x => x.generate_query(w, s, rng))
    }

    fn query_distribution(&self, w: &[usize], s: &[usize]) -> crate::pir_linear::Result<Vec<(Rational, PirQuery)>> {
        both!(self, x => x.query_distribution(w, s))
    }

    fn answer(&self, query: &PirQuery, x: &[u32]) -> crate::pir_linear::Result<PirAnswer> {
        both!(self, s => s.answer(query, x))
    }

    fn decoder(&self, query: &PirQuery, w: &[usize], s: &[usize]) -> crate::pir_linear::Result<AnyDecoder> {
        match self {
            AnyScheme::Linear(x) => x.decoder(query, w, s).map(AnyDecoder::Linear),
            AnyScheme::General(x) => x.decoder(query, w, s).map(AnyDecoder::General),
        }
    }

    fn decode(&self, dec: &AnyDecoder, answer: &PirAnswer, x_s: &[u32]) -> crate::pir_linear::Result<Vec<u32>> {
        match (self, dec) {
            (AnyScheme::Linear(x), AnyDecoder::Linear(d)) => x.decode(d, answer, x_s),
            (AnyScheme::General(x), AnyDecoder::General(d)) => x.decode(d, answer, x_s),
            _ => Err(PirError::QueryMismatch),
        }
    }

    fn download_symbols(&self) -> usize {
        both!(self, s => s.download_symbols())
    }

    fn solution_matrix(&self) -> Option<&crate::matrix::Matrix> {
        both!(self, s => s.solution_matrix())
    }
}

/// Database file: `q K` on the first line, the `K` values on the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    pub field: Field,
    pub values: Vec<u32>,
}

impl Database {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| SessionError::Database(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("empty file"))?
            .split_whitespace()
            .collect();
        let [q, k] = header[..] else {
            return Err(bad("header must be \"q K\""));
        };
        let q: u32 = q.parse().map_err(|_| bad(q))?;
        let k: usize = k.parse().map_err(|_| bad(k))?;
        let field = field_of_order(q)?;
        let values = lines
            .flat_map(str::split_whitespace)
            .map(|t| {
                let v: u32 = t.parse().map_err(|_| bad(t))?;
                Ok(field.check(v)?)
            })
            .collect::<Result<Vec<u32>>>()?;
        if values.len() != k {
            return Err(bad(&format!("expected {k} values, found {}", values.len())));
        }
        Ok(Database { field, values })
    }

    pub fn to_text(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(u32::to_string).collect();
        format!("{} {}\n{}\n", self.field.order(), self.values.len(), vals.join(" "))
    }

    /// Values drawn from stream 1 of a `ChaCha8Rng` seeded with `seed`
    /// (queries use stream 0).
    pub fn from_seed(field: &Field, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let values = (0..k).map(|_| rng.gen_range(0..field.order())).collect();
        Database {
            field: field.clone(),
            values,
        }
    }
}

/// Server side of a session; immutable once built.
#[derive(Debug)]
pub struct ServerState {
    config: SessionConfig,
    scheme: AnyScheme,
    db: Database,
}

impl ServerState {
    pub fn new(config: SessionConfig, db: Database) -> Result<Self> {
        let scheme = config.build()?;
        if db.field != *scheme.field() || db.values.len() != config.k {
            return Err(SessionError::Config(format!(
                "database has q={} K={}, scheme needs q={} K={}",
                db.field.order(),
                db.values.len(),
                config.q,
                config.k
            )));
        }
        Ok(ServerState { config, scheme, db })
    }

    pub fn handle(&self, frame: &Frame) -> Frame {
        match frame.kind {
            FrameType::Hello => {
                let ours = self.config.describe();
                if frame.payload_text() == ours {
                    Frame::text(FrameType::Hello, &ours)
                } else {
                    Frame::text(FrameType::Error, &format!("configuration mismatch; server runs {ours}"))
                }
            }
            FrameType::Query => {
                let reply = PirQuery::parse(&frame.payload_text())
                    .map_err(PirError::from)
                    .and_then(|q| self.scheme.answer(&q, &self.db.values));
                match reply {
                    Ok(a) => Frame::text(FrameType::Answer, &a.to_text()),
                    Err(e) => Frame::text(FrameType::Error, &e.to_string()),
                }
            }
            other => Frame::text(FrameType::Error, &format!("unexpected {} frame", other.name())),
        }
    }
}

/// One request/response exchange.
pub trait Transport {
    fn exchange(&mut self, frame: &Frame) -> Result<Frame>;
}

/// Runs frames through the codec and straight into a [`ServerState`].
pub struct LocalTransport<'a> {
    pub server: &'a ServerState,
}

impl Transport for LocalTransport<'_> {
    fn exchange(&mut self, frame: &Frame) -> Result<Frame> {
        let mut dec = FrameDecoder::new();
        dec.push(&frame.encode());
        let request = dec.next_frame()?.expect("whole frame buffered");
        dec.push(&self.server.handle(&request).encode());
        Ok(dec.next_frame()?.expect("whole frame buffered"))
    }
}

pub struct TcpTransport {
    stream: TcpStream,
    decoder: FrameDecoder,
}

impl TcpTransport {
    pub fn connect(addr: SocketAddr) -> Result<Self> {
        Ok(TcpTransport {
            stream: TcpStream::connect(addr)?,
            decoder: FrameDecoder::new(),
        })
    }
}

impl Transport for TcpTransport {
    fn exchange(&mut self, frame: &Frame) -> Result<Frame> {
        write_frame(&mut self.stream, frame)?;
        read_frame(&mut self.stream, &mut self.decoder)?
            .ok_or_else(|| SessionError::Protocol("server closed the connection".into()))
    }
}

/// What the client asks for; indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub w: Vec<usize>,
    pub s: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub transcript: String,
    pub recovered: Vec<u32>,
    /// Recovered values equal the client's copy of `X_W`.
    pub matches: bool,
}

fn one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Client side. `db` is the client's copy: it supplies `X_S` and the
/// expected `X_W` for the final check line.
pub fn run_client(
    transport: &mut dyn Transport,
    config: &SessionConfig,
    db: &Database,
    request: &Request,
) -> Result<SessionOutcome> {
    let scheme = config.build()?;
    let mut w = request.w.clone();
    let mut s = request.s.clone();
    w.sort_unstable();
    s.sort_unstable();
    if db.values.len() != config.k || db.field != *scheme.field() {
        return Err(SessionError::Config("database does not match the scheme".into()));
    }
    let mut log = vec![format!(
        "session {} seed={} W={{{}}} S={{{}}}",
        config.describe(),
        request.seed,
        one_based(&w),
        one_based(&s)
    )];
    let exchange = |t: &mut dyn Transport, log: &mut Vec<String>, f: Frame| -> Result<Frame> {
        log.push(format!("> {} {}", f.kind.name(), f.payload_text()));
        let reply = t.exchange(&f)?;
        log.push(format!("< {} {}", reply.kind.name(), reply.payload_text()));
        if reply.kind == FrameType::Error {
            return Err(SessionError::Remote(reply.payload_text()));
        }
        Ok(reply)
    };
    let hello = exchange(transport, &mut log, Frame::text(FrameType::Hello, &config.describe()))?;
    if hello.kind != FrameType::Hello {
        return Err(SessionError::Protocol(format!(
            "expected hello, got {}",
            hello.kind.name()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    let query = scheme.generate_query(&w, &s, &mut rng)?;
    let reply = exchange(transport, &mut log, Frame::text(FrameType::Query, &query.to_text()))?;
    if reply.kind != FrameType::Answer {
        return Err(SessionError::Protocol(format!(
            "expected answer, got {}",
            reply.kind.name()
        )));
    }
    let answer = PirAnswer::parse(&reply.payload_text(), scheme.field())?;
    let x_s: Vec<u32> = s.iter().map(|&i| db.values[i]).collect();
    let recovered = scheme.recover(&query, &answer, &w, &s, &x_s)?;
    for (&i, v) in w.iter().zip(&recovered) {
        log.push(format!("recovered X{}={v}", i + 1));
    }
    let matches = w.iter().zip(&recovered).all(|(&i, &v)| db.values[i] == v);
    log.push(format!("check={}", if matches { "PASS" } else { "FAIL" }));
    let mut transcript = log.join("\n");
    transcript.push('\n');
    Ok(SessionOutcome {
        transcript,
        recovered,
        matches,
    })
}

/// In-process session against a server holding `db`.
pub fn demo(config: &SessionConfig, db: &Database, request: &Request) -> Result<SessionOutcome> {
    let server = ServerState::new(*config, db.clone())?;
    run_client(&mut LocalTransport { server: &server }, config, db, request)
}

pub fn fetch(addr: SocketAddr, config: &SessionConfig, db: &Database, request: &Request) -> Result<SessionOutcome> {
    run_client(&mut TcpTransport::connect(addr)?, config, db, request)
}

fn serve_connection(state: &ServerState, mut stream: TcpStream) -> Result<()> {
    let mut decoder = FrameDecoder::new();
    while let Some(frame) = read_frame(&mut stream, &mut decoder)? {
        write_frame(&mut stream, &state.handle(&frame))?;
    }
    Ok(())
}

/// Accepts connections, one thread each. Stops after `sessions` connections
/// when given and waits for them to finish.
pub fn serve(listener: TcpListener, state: Arc<ServerState>, sessions: Option<usize>) -> Result<()> {
    let mut handles = Vec::new();
    for (n, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let state = Arc::clone(&state);
        handles.push(thread::spawn(move || {
            // a misbehaving client only ends its own session
            let _ = serve_connection(&state, stream);
        }));
        if sessions.is_some_and(|limit| n + 1 >= limit) {
            break;
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}
