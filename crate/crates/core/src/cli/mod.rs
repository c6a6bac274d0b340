//! Command-line driver: file formats, subcommands and the framed protocol.
//!
//! Exit status is 0 when everything checked passes, 1 on a verification
//! failure (or a failed session), 2 on a usage error.

pub mod frame;
pub mod session;

use std::fs;
use std::io::Write;
use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::audit::{self, DatabaseDomain, DATABASE_LIMIT};
use crate::codes::{check_bounds, cooperative_locality, verify_all_symbol_locality, LinearCode, RepairPlan};
use crate::combinat::{checked_power, factorial};
use crate::constructions::{grs_mds_parity_check, partition_and_code, simplex_code};
use crate::field::field_of_order;
use crate::matrix::Matrix;
use crate::perm::Permutation;
use crate::pir_general::{decoders_for_query, extract_lrc_from_pir};
use crate::pir_linear::{pir_to_lrc, PirProtocol, PirScheme, PrivacyMode};
use session::{Database, Request, SchemeId, ServerState, SessionConfig, SessionError};

pub use session::{demo, fetch, serve};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Config(_) | SessionError::Database(_) | SessionError::Field(_) | SessionError::Pir(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "pirsi", about = "PIR with side information and locally recoverable codes")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a matrix or code from a named family.
    Construct {
        family: Family,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
    /// Check locality (and cooperative locality with --ell) of a code.
    Verify {
        #[command(flatten)]
        input: CodeInput,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Evaluate the locality bounds on a code.
    Bounds {
        #[command(flatten)]
        input: CodeInput,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Move between solution matrices and codes.
    Transform {
        #[command(subcommand)]
        kind: TransformKind,
    },
    /// Run an audit on a named scheme.
    Audit {
        kind: AuditChoice,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Sample this many databases instead of enumerating all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a full session in process and print the transcript.
    Demo {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        request: RequestArgs,
        /// Database file; drawn from the seed when absent.
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Answer queries over TCP.
    Serve {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value_t = 0)]
        port: u16,
        /// Exit after this many connections.
        #[arg(long)]
        sessions: Option<usize>,
    },
    /// Run a session against a server and print the transcript.
    Fetch {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        request: RequestArgs,
        /// The client's copy of the database (side information and check).
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Pac,
    Simplex,
    Grs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuditChoice {
    Recoverability,
    Privacy,
    WsPrivacy,
    Rate,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    #[value(name = "W")]
    W,
    #[value(name = "WS")]
    Ws,
}

impl From<ModeArg> for PrivacyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::W => PrivacyMode::WPrivate,
            ModeArg::Ws => PrivacyMode::WsPrivate,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct CodeInput {
    /// Parity-check matrix file ("q rows cols" header).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Code file ("code n k q" header).
    #[arg(long)]
    code: Option<PathBuf>,
}

impl CodeInput {
    fn load(&self) -> Result<LinearCode> {
        match (&self.matrix, &self.code) {
            (Some(p), _) => Ok(LinearCode::from_parity_check(&Matrix::parse(&read(p)?).map_err(usage)?)),
            (_, Some(p)) => LinearCode::parse(&read(p)?).map_err(usage),
            _ => Err(usage("one of --matrix or --code is required")),
        }
    }
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "pac")]
    scheme: SchemeId,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

impl SchemeArgs {
    fn config(&self) -> Result<SessionConfig> {
        let k = match (self.k, self.scheme) {
            (Some(k), _) => k,
            (None, SchemeId::Simplex7) => 7,
            (None, _) => return Err(usage("--k is required for this scheme")),
        };
        if let Some(mode) = self.mode {
            if PrivacyMode::from(mode) != self.scheme.mode() {
                return Err(usage(format!(
                    "scheme {} runs in {} mode",
                    self.scheme.name(),
                    self.scheme.mode()
                )));
            }
        }
        Ok(SessionConfig {
            scheme: self.scheme,
            k,
            m: self.m,
            d: self.d,
            q: self.q,
        })
    }
}

#[derive(Debug, Args)]
struct RequestArgs {
    /// Demanded indices, one-based, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    w: Vec<usize>,
    /// Side-information indices, one-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    s: Vec<usize>,
    #[arg(long)]
    seed: u64,
}

impl RequestArgs {
    fn request(&self) -> Result<Request> {
        let zero = |v: &[usize]| -> Result<Vec<usize>> {
            v.iter()
                .map(|&i| i.checked_sub(1).ok_or_else(|| usage("indices are one-based")))
                .collect()
        };
        Ok(Request {
            w: zero(&self.w)?,
            s: zero(&self.s)?,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Subcommand)]
enum TransformKind {
    /// Read a solution matrix as a parity check and verify the code.
    PirToLrc {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, value_enum, default_value = "W")]
        mode: ModeArg,
    },
    /// Build a scheme from a code and audit it.
    LrcToPir {
        #[command(flatten)]
        input: CodeInput,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Extract an LRC from a scheme's answer map under the identity query.
    Extract {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn flag(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Failed(e.to_string()))
}

/// Runs a command; `Ok(false)` means a check failed.
fn execute(command: Command, out: &mut dyn Write) -> Result<bool> {
    match command {
        Command::Construct { family, k, m, q } => {
            let field = field_of_order(q).map_err(usage)?;
            let need_k = || k.ok_or_else(|| usage("--k is required for this family"));
            let text = match family {
                Family::Pac => partition_and_code(need_k()?, m, &field).map_err(usage)?.to_text(),
                Family::Simplex => simplex_code(m).map_err(usage)?.to_text(),
                Family::Grs => grs_mds_parity_check(need_k()?, m, &field).map_err(usage)?.to_text(),
            };
            emit(out, &text)?;
            Ok(true)
        }
        Command::Verify { input, r, ell } => {
            let code = input.load()?;
            let (ok, text) = verify_code(&code, r, ell)?;
            emit(out, &text)?;
            Ok(ok)
        }
        Command::Bounds { input, r, ell } => {
            let code = input.load()?;
            let Some(plan) = locality_plan(&code, r, ell)? else {
                emit(out, &format!("locality {r} does not hold\nresult=FAIL\n"))?;
                return Ok(false);
            };
            let report = check_bounds(&code, &plan).map_err(usage)?;
            emit(out, &report.render())?;
            emit(out, &format!("result={}\n", flag(report.all_satisfied())))?;
            Ok(report.all_satisfied())
        }
        Command::Transform { kind } => transform(kind, out),
        Command::Audit {
            kind,
            scheme,
            samples,
            seed,
        } => {
            let config = scheme.config()?;
            let scheme = config.build()?;
            let domain = match samples {
                Some(n) => DatabaseDomain::Sample { n, seed },
                None if checked_power(config.q, config.k).is_some_and(|s| s <= DATABASE_LIMIT) => DatabaseDomain::All,
                None => DatabaseDomain::Sample { n: 1000, seed },
            };
            run_audits(&scheme, kind, domain, out)
        }
        Command::Demo { scheme, request, db } => {
            let config = scheme.config()?;
            let db = match db {
                Some(p) => Database::parse(&read(&p)?)?,
                None => Database::from_seed(&field_of_order(config.q).map_err(usage)?, config.k, request.seed),
            };
            let outcome = demo(&config, &db, &request.request()?)?;
            emit(out, &outcome.transcript)?;
            Ok(outcome.matches)
        }
        Command::Serve {
            scheme,
            db,
            port,
            sessions,
        } => {
            let config = scheme.config()?;
            let state = ServerState::new(config, Database::parse(&read(&db)?)?)?;
            let listener = TcpListener::bind(("127.0.0.1", port)).map_err(|e| CliError::Failed(e.to_string()))?;
            let addr = listener.local_addr().map_err(|e| CliError::Failed(e.to_string()))?;
            emit(out, &format!("listening {addr}\n"))?;
            out.flush().map_err(|e| CliError::Failed(e.to_string()))?;
            serve(listener, Arc::new(state), sessions)?;
            Ok(true)
        }
        Command::Fetch {
            scheme,
            request,
            db,
            port,
            host,
        } => {
            let config = scheme.config()?;
            let db = Database::parse(&read(&db)?)?;
            let addr: SocketAddr = format!("{host}:{port}").parse().map_err(usage)?;
            let outcome = fetch(addr, &config, &db, &request.request()?)?;
            emit(out, &outcome.transcript)?;
            Ok(outcome.matches)
        }
    }
}

fn locality_plan(code: &LinearCode, r: usize, ell: Option<usize>) -> Result<Option<RepairPlan>> {
    let check = verify_all_symbol_locality(code, r).map_err(usage)?;
    let Some(mut plan) = check.into_plan() else {
        return Ok(None);
    };
    if let Some(ell) = ell {
        match cooperative_locality(code, r, ell).map_err(usage)?.into_plan() {
            Some(c) => plan = plan.with_cooperative(c),
            None => return Ok(None),
        }
    }
    Ok(Some(plan))
}

fn verify_code(code: &LinearCode, r: usize, ell: Option<usize>) -> Result<(bool, String)> {
    let mut text = format!(
        "n={} k={} q={} d={}\n",
        code.n(),
        code.k(),
        code.field().order(),
        code.min_distance().map_err(usage)?
    );
    let check = verify_all_symbol_locality(code, r).map_err(usage)?;
    let mut ok = check.holds();
    for (i, g) in check.groups.iter().enumerate() {
        match g {
            Some(g) => {
                let members: Vec<String> = g.members.iter().map(|m| (m + 1).to_string()).collect();
                text.push_str(&format!("R({})={{{}}}\n", i + 1, members.join(",")));
            }
            None => text.push_str(&format!("R({})=none\n", i + 1)),
        }
    }
    text.push_str(&format!("locality {r}: {}\n", flag(check.holds())));
    if let Some(ell) = ell {
        let coop = cooperative_locality(code, r, ell).map_err(usage)?;
        text.push_str(&format!(
            "cooperative ({r},{ell}): {} ({} failing sets)\n",
            flag(coop.holds()),
            coop.failures().len()
        ));
        ok &= coop.holds();
    }
    text.push_str(&format!("result={}\n", flag(ok)));
    Ok((ok, text))
}

fn transform(kind: TransformKind, out: &mut dyn Write) -> Result<bool> {
    match kind {
        TransformKind::PirToLrc { matrix, m, d, mode } => {
            let e = Matrix::parse(&read(&matrix)?).map_err(usage)?;
            match pir_to_lrc(&e, m, d, mode.into()) {
                Ok((code, report)) => {
                    emit(out, &format!("verified {}\n", report.property))?;
                    emit(out, &code.to_text())?;
                    Ok(true)
                }
                Err(e) => {
                    emit(out, &format!("{e}\nresult=FAIL\n"))?;
                    Ok(false)
                }
            }
        }
        TransformKind::LrcToPir { input, m, d } => {
            let code = input.load()?;
            let scheme = match PirScheme::from_cooperative_lrc(&code, m, d) {
                Ok(s) => s,
                Err(e) => {
                    emit(out, &format!("{e}\nresult=FAIL\n"))?;
                    return Ok(false);
                }
            };
            let p = scheme.params();
            let domain = if checked_power(p.q, p.k).is_some_and(|s| s <= DATABASE_LIMIT) {
                DatabaseDomain::All
            } else {
                DatabaseDomain::Sample { n: 1000, seed: 0 }
            };
            emit(out, &scheme.parity_check().to_text())?;
            run_audits(&scheme, AuditChoice::All, domain, out)
        }
        TransformKind::Extract { scheme } => {
            let config = scheme.config()?;
            let built = config.build()?;
            let p = built.params();
            let plan = match &built {
                session::AnyScheme::Linear(s) => s.query_plan(),
                session::AnyScheme::General(g) => Some(g.query_plan()),
            }
            .ok_or_else(|| usage("extraction needs a permutation-query scheme"))?;
            if p.d != 1 {
                return Err(usage("extraction needs a single-message scheme"));
            }
            let id = Permutation::identity(p.k);
            let query = crate::query::PirQuery::Permutation(id.clone());
            let decoders = decoders_for_query(&built, plan, &id).map_err(|e| CliError::Failed(e.to_string()))?;
            let t = built.download_symbols();
            let ext = extract_lrc_from_pir(
                built.field(),
                p.k,
                t,
                |x| built.answer(&query, x).map(|a| a.values).unwrap_or_default(),
                &decoders,
            )
            .map_err(|e| CliError::Failed(e.to_string()))?;
            let ok = ext.lrc.len() as u64 >= ext.size_floor && ext.lrc.verify_repair();
            emit(
                out,
                &format!(
                    "answer={:?}\nsize={}\nfloor={}\nrepair={}\n",
                    ext.answer,
                    ext.lrc.len(),
                    ext.size_floor,
                    flag(ext.lrc.verify_repair())
                ),
            )?;
            emit(out, &ext.lrc.to_text())?;
            emit(out, &format!("result={}\n", flag(ok)))?;
            Ok(ok)
        }
    }
}

fn run_audits<P: PirProtocol + Sync>(
    scheme: &P,
    kind: AuditChoice,
    domain: DatabaseDomain,
    out: &mut dyn Write,
) -> Result<bool> {
    let want = |k: AuditChoice| kind == k || kind == AuditChoice::All;
    let failed = |e: audit::AuditError| CliError::Failed(e.to_string());
    let mut ok = true;
    if want(AuditChoice::Recoverability) {
        let r = audit::audit_recoverability(scheme, domain).map_err(failed)?;
        emit(out, &r.render())?;
        ok &= r.pass;
    }
    let ws = scheme.mode() == PrivacyMode::WsPrivate;
    if want(AuditChoice::Privacy) {
        let r = audit::audit_w_privacy(scheme).map_err(failed)?;
        emit(out, &r.render())?;
        if !ws {
            let k = scheme.params().k;
            emit(out, &format!("uniform 1/{} : {}\n", factorial(k), flag(r.pass)))?;
        }
        ok &= r.pass;
    }
    if want(AuditChoice::WsPrivacy) && (ws || kind == AuditChoice::WsPrivacy) {
        let r = audit::audit_ws_privacy(scheme).map_err(failed)?;
        emit(out, &r.render())?;
        ok &= r.pass;
    }
    if want(AuditChoice::Rate) {
        let r = audit::measure_rate(scheme);
        emit(out, &r.render())?;
        ok &= r.pass;
    }
    Ok(ok)
}
