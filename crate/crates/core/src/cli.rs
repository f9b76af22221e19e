//! `seqlab` command line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 budget
//! exceeded (including a deliberate `--halt-after` stop).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::census::{self, CensusReport, DEFAULT_SCAN_THRESHOLD};
use crate::certify::{self, Certificate, SearchOptions};
use crate::checkpoint;
use crate::error::Error;
use crate::growth::{self, Verdict};
use crate::seqcore::{residue_stream_with, Budget, Modulus, ResidueTable};
use crate::structure;
use crate::verdict::{LemmaVerdict, Witness};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "seqlab",
    version,
    about = "Residue censuses, density certificates and growth checks for a(n) = a(n-1) + a(floor(n/2))"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout; a `.manifest.json` sidecar is
    /// written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Residue-class counts of a(1..=limit) modulo m.
    Census(CensusArgs),
    /// Deviation of every census with m <= max-m from its conjectured density.
    Scan(ScanArgs),
    /// Finite-range verifiers.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Exact minimum window hit count for (x, m, j).
    Certify(CertifyArgs),
    /// Re-check a certificate file.
    VerifyCertificate(VerifyCertificateArgs),
    /// a(n) > n^f(n) for every n in [from, to].
    Growth(GrowthArgs),
    /// Largest observed ln a(n) - (f(n) + epsilon) ln n.
    Probe(ProbeArgs),
    /// Sampled checks of the analytic inequalities.
    Lemmas(LemmasArgs),
}

#[derive(Debug, Args, Serialize)]
struct CensusArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    limit: u64,
    /// Snapshot file refreshed during the pass.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Refresh the snapshot every this many indices.
    #[arg(long, requires = "checkpoint")]
    checkpoint_every: Option<u64>,
    /// Continue from a snapshot.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Stop after this index, leaving a snapshot behind.
    #[arg(long, requires = "checkpoint")]
    halt_after: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct ScanArgs {
    #[arg(long)]
    max_m: u32,
    #[arg(long)]
    limit: u64,
    /// Largest tolerated absolute deviation.
    #[arg(long, default_value_t = DEFAULT_SCAN_THRESHOLD)]
    threshold: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VerifyCommand {
    /// Parity, quadrupling, quadruple and scaled-set lemmas.
    Structure {
        #[arg(long)]
        limit: u64,
    },
    /// Mod 8 counting bound.
    Mod8 {
        #[arg(long)]
        limit: u64,
    },
    /// Window runs for (n, j) are inside [3, n] and pairwise disjoint.
    Window {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        j: u32,
    },
    /// Every realised window up to the limit respects a certificate.
    Empirical {
        /// Certificate JSON file.
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        limit: u64,
    },
}

#[derive(Debug, Args, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    x: u32,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    j: u32,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Budget on leaf tuples examined.
    #[arg(long)]
    tuple_budget: Option<u64>,
    /// Partition progress file; an existing one is resumed.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Use the flat enumeration instead of the pruned search.
    #[arg(long)]
    naive: bool,
}

#[derive(Debug, Args, Serialize)]
struct VerifyCertificateArgs {
    path: PathBuf,
    /// Also rerun the search and compare.
    #[arg(long)]
    full: bool,
}

#[derive(Debug, Args, Serialize)]
struct GrowthArgs {
    #[arg(long)]
    from: u64,
    #[arg(long)]
    to: u64,
}

#[derive(Debug, Args, Serialize)]
struct ProbeArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    limit: u64,
}

#[derive(Debug, Args, Serialize)]
struct LemmasArgs {
    /// Samples per decade on the real-variable grids.
    #[arg(long, default_value_t = 10)]
    grid_density: u32,
}

/// Provenance sidecar for a file written with `--out`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub started_at: String,
    pub finished_at: String,
    pub checkpoint: Option<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
    pub tool_version: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest.json");
    PathBuf::from(p)
}

/// A rendered result plus the exit code it implies.
struct Outcome {
    body: Vec<u8>,
    code: i32,
    checkpoint: Option<PathBuf>,
}

impl Outcome {
    fn new(body: Vec<u8>, ok: bool) -> Self {
        Self {
            body,
            code: if ok { EXIT_OK } else { EXIT_FAILED },
            checkpoint: None,
        }
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
    /// Budget stop that still has something to emit.
    Budget(String, Outcome),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidModulus(_)
        | Error::ModulusTooLarge(_)
        | Error::UnsupportedModulus { .. }
        | Error::InvalidArgument(_) => EXIT_USAGE,
        Error::Capacity { .. } | Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_FAILED,
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, Failure> {
    let mut body = serde_json::to_vec_pretty(v).map_err(Error::from)?;
    body.push(b'\n');
    Ok(body)
}

fn csv_unsupported(what: &str) -> Failure {
    Failure::Usage(format!(
        "--format csv is not available for {what}; use json"
    ))
}

fn verdicts_body(verdicts: &[LemmaVerdict], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => json(&verdicts),
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "lemma_id,N,status,counterexample")?;
            for v in verdicts {
                let ce = match &v.counterexample {
                    None => String::new(),
                    Some(Witness::Indices(ix)) => join(ix),
                    Some(Witness::Point(p)) => join(p),
                };
                let status = if v.is_pass() { "pass" } else { "fail" };
                writeln!(out, "{},{},{status},{ce}", v.lemma_id, v.n)?;
            }
            Ok(out)
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn verdicts_outcome(verdicts: Vec<LemmaVerdict>, format: Format) -> Result<Outcome, Failure> {
    let ok = verdicts.iter().all(LemmaVerdict::is_pass);
    Ok(Outcome::new(verdicts_body(&verdicts, format)?, ok))
}

fn census_body(report: &CensusReport, format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut out = Vec::new();
            census::write_csv(std::slice::from_ref(report), &mut out)?;
            Ok(out)
        }
    }
}

fn run_census(a: &CensusArgs, format: Format, budget: &Budget) -> Result<Outcome, Failure> {
    let m = Modulus::new(a.m)?;
    if a.checkpoint.is_none() && a.resume.is_none() {
        let report = census::run_census_with(m, a.limit, budget)?;
        return Ok(Outcome::new(census_body(&report, format)?, true));
    }
    let mut table: ResidueTable = match &a.resume {
        Some(path) => {
            let t = checkpoint::load(path)?;
            if t.modulus() != m {
                return Err(Failure::Usage(format!(
                    "{} holds a mod {} pass, not mod {m}",
                    path.display(),
                    t.modulus()
                )));
            }
            if t.limit() > a.limit {
                return Err(Failure::Usage(format!(
                    "{} already reaches index {}, beyond --limit {}",
                    path.display(),
                    t.limit(),
                    a.limit
                )));
            }
            t
        }
        None => residue_stream_with(m, 1, budget)?,
    };
    let target = a.halt_after.map_or(a.limit, |h| h.min(a.limit));
    let step = a.checkpoint_every.filter(|&k| k > 0).unwrap_or(u64::MAX);
    while table.limit() < target {
        let next = table.limit().saturating_add(step).min(target);
        table.extend_to(next, budget)?;
        if let Some(path) = &a.checkpoint {
            checkpoint::save(&table, path)?;
        }
    }
    if let Some(path) = &a.checkpoint {
        checkpoint::save(&table, path)?;
    }
    if table.limit() < a.limit {
        let path = a
            .checkpoint
            .clone()
            .expect("halt-after requires a checkpoint");
        let msg = format!(
            "halted at index {} of {}; resume with --resume {}",
            table.limit(),
            a.limit,
            path.display()
        );
        let outcome = Outcome {
            body: Vec::new(),
            code: EXIT_BUDGET,
            checkpoint: Some(path),
        };
        return Err(Failure::Budget(msg, outcome));
    }
    let report = CensusReport::from_table(&table);
    let mut outcome = Outcome::new(census_body(&report, format)?, true);
    outcome.checkpoint = a.checkpoint.clone().or_else(|| a.resume.clone());
    Ok(outcome)
}

fn run_scan(a: &ScanArgs, format: Format, budget: &Budget) -> Result<Outcome, Failure> {
    let scan = census::deviation_scan_with(a.max_m, a.limit, budget)?;
    let body = match format {
        Format::Json => json(&scan)?,
        Format::Csv => {
            let mut out = Vec::new();
            census::write_csv(&scan.reports, &mut out)?;
            out
        }
    };
    Ok(Outcome::new(body, scan.passes(a.threshold)))
}

fn read_certificate(path: &Path) -> Result<Certificate, Failure> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Usage(format!("{} is not a certificate: {e}", path.display())))
}

fn run_verify(v: &VerifyCommand, format: Format, budget: &Budget) -> Result<Outcome, Failure> {
    let verdicts = match v {
        VerifyCommand::Structure { limit } => structure::run_suite(*limit)?,
        VerifyCommand::Mod8 { limit } => vec![census::mod8_bound_check(*limit)?],
        VerifyCommand::Window { n, j } => vec![certify::verify_window_disjoint(*n, *j)?],
        VerifyCommand::Empirical { certificate, limit } => {
            let cert = read_certificate(certificate)?;
            let table = residue_stream_with(Modulus::new(cert.m)?, *limit, budget)?;
            vec![certify::empirical_window_check(&cert, &table)?]
        }
    };
    verdicts_outcome(verdicts, format)
}

fn run_certify(a: &CertifyArgs, format: Format) -> Result<Outcome, Failure> {
    if format == Format::Csv {
        return Err(csv_unsupported("certificates"));
    }
    let m = Modulus::new(a.m)?;
    let result = if a.naive {
        certify::naive_min_hits(a.x, m, a.j)
    } else {
        let time_budget = match a.time_budget {
            Some(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(Failure::Usage(format!(
                    "--time-budget must be positive, got {s}"
                )))
            }
            s => s.map(Duration::from_secs_f64),
        };
        let opts = SearchOptions {
            time_budget,
            tuple_budget: a.tuple_budget,
            checkpoint: a.checkpoint.clone(),
        };
        certify::search_min_hits_with(a.x, m, a.j, &opts)
    };
    match result {
        Ok(cert) => Ok(Outcome::new(json(&cert)?, true)),
        Err(Error::BudgetExceeded { limit, partial }) => {
            let outcome = Outcome {
                body: json(&partial)?,
                code: EXIT_BUDGET,
                checkpoint: a.checkpoint.clone(),
            };
            Err(Failure::Budget(
                format!("search stopped at the {limit}; the emitted certificate is not certified"),
                outcome,
            ))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct FullCheck {
    witness: certify::WitnessCheck,
    search_e: Option<u32>,
    search_witness: Option<Vec<u32>>,
    ok: bool,
}

fn run_verify_certificate(a: &VerifyCertificateArgs, format: Format) -> Result<Outcome, Failure> {
    if format == Format::Csv {
        return Err(csv_unsupported("certificate checks"));
    }
    let cert = read_certificate(&a.path)?;
    let witness = certify::verify_certificate(&cert)?;
    let mut ok = witness.ok && cert.certified;
    let (search_e, search_witness) = if a.full {
        let fresh = certify::search_min_hits(cert.x, Modulus::new(cert.m)?, cert.j)?;
        ok &= fresh.e == cert.e && fresh.witness_tuple == cert.witness_tuple;
        (Some(fresh.e), Some(fresh.witness_tuple))
    } else {
        (None, None)
    };
    let report = FullCheck {
        witness,
        search_e,
        search_witness,
        ok,
    };
    Ok(Outcome::new(json(&report)?, ok))
}

fn run_growth(a: &GrowthArgs, format: Format) -> Result<Outcome, Failure> {
    let records = growth::growth_lower_check(a.from, a.to)?;
    let ok = records.iter().all(|r| r.verdict == Verdict::Pass);
    let body = match format {
        Format::Json => json(&records)?,
        Format::Csv => {
            let mut out = Vec::new();
            growth::write_growth_csv(&records, &mut out)?;
            out
        }
    };
    Ok(Outcome::new(body, ok))
}

fn run_probe(a: &ProbeArgs, format: Format) -> Result<Outcome, Failure> {
    if format == Format::Csv {
        return Err(csv_unsupported("probes"));
    }
    let probe = growth::upper_probe(a.epsilon, a.limit)?;
    Ok(Outcome::new(json(&probe)?, true))
}

fn execute(cli: &Cli, budget: &Budget) -> Result<Outcome, Failure> {
    let format = cli.global.format;
    match &cli.command {
        Command::Census(a) => run_census(a, format, budget),
        Command::Scan(a) => run_scan(a, format, budget),
        Command::Verify(v) => run_verify(v, format, budget),
        Command::Certify(a) => run_certify(a, format),
        Command::VerifyCertificate(a) => run_verify_certificate(a, format),
        Command::Growth(a) => run_growth(a, format),
        Command::Probe(a) => run_probe(a, format),
        Command::Lemmas(a) => {
            verdicts_outcome(growth::analytic_lemma_suite(a.grid_density)?, format)
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Census(_) => "census",
        Command::Scan(_) => "scan",
        Command::Verify(_) => "verify",
        Command::Certify(_) => "certify",
        Command::VerifyCertificate(_) => "verify-certificate",
        Command::Growth(_) => "growth",
        Command::Probe(_) => "probe",
        Command::Lemmas(_) => "lemmas",
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn emit(cli: &Cli, outcome: &Outcome, started_at: &str) -> std::io::Result<()> {
    let Some(out) = &cli.global.out else {
        std::io::stdout().write_all(&outcome.body)?;
        return Ok(());
    };
    let mut outputs = Vec::new();
    if !outcome.body.is_empty() {
        write_atomic(out, &outcome.body)?;
        outputs.push(out.clone());
    }
    let manifest = RunManifest {
        subcommand: subcommand_name(&cli.command).to_string(),
        parameters: serde_json::json!({
            "global": &cli.global,
            "command": &cli.command,
        }),
        started_at: started_at.to_string(),
        finished_at: chrono::Utc::now().to_rfc3339(),
        checkpoint: outcome.checkpoint.clone(),
        outputs,
        exit_code: outcome.code,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut body = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
    body.push(b'\n');
    write_atomic(&manifest_path(out), &body)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // a second configuration in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let started_at = chrono::Utc::now().to_rfc3339();
    let budget = Budget::from_env();
    let outcome = match execute(&cli, &budget) {
        Ok(outcome) => outcome,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
        Err(Failure::Budget(msg, outcome)) => {
            eprintln!("budget: {msg}");
            outcome
        }
    };
    if let Err(e) = emit(&cli, &outcome, &started_at) {
        eprintln!("error: writing output: {e}");
        return EXIT_FAILED;
    }
    outcome.code
}
