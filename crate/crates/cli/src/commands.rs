use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;
use seqfam_core::arith::{checked_pow, is_prime};
use seqfam_core::array::{column_sequence, coset};
use seqfam_core::correlation::{
    cross_correlation, cyclic_inequivalence, max_correlation, CorrelationReport, InequivalenceReport,
    ScanOptions,
};
use seqfam_core::counting::{count_report, sweep_csv, CountReport};
use seqfam_core::family::{build_family, Policy};
use seqfam_core::field::{build_extension_with_limit, build_field_with_limit, ExtensionContext, FieldContext};
use seqfam_core::sidelnikov::{sidelnikov_sequence, sidelnikov_sequence_ext, write_sequence, ExportHeader};
use seqfam_core::verify::{run_verification, VerificationSummary, VerifyOptions};
use seqfam_core::Error;

use crate::{CorrelateArgs, CountArgs, FamilyArgs, FamilyParams, FieldArgs, Format, GenerateArgs, Output, VerifyArgs};

pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from(passed: bool) -> Self {
        if passed {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::RestrictionViolated { .. } | Error::Consistency(_) => 1,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<Status, Failure>;

/// Rejects incompatible parameters before any table is built.
fn check_parameters(field: &FieldArgs, d: Option<u32>, m: Option<u64>) -> Result<u64, Failure> {
    if !is_prime(field.p) {
        return Err(Error::NotPrime(field.p).into());
    }
    if field.n == 0 {
        return Err(Failure::usage("n must be at least 1"));
    }
    let q = checked_pow(field.p, field.n)?;
    if let Some(m) = m {
        if m < 2 {
            return Err(Failure::usage(format!("M must be at least 2 (got {m})")));
        }
        if (q - 1) % m != 0 {
            return Err(Error::AlphabetMismatch { m, q }.into());
        }
    }
    if let Some(d) = d {
        if d < 2 {
            return Err(Failure::usage("d must be at least 2"));
        }
        let order = checked_pow(q, d)?;
        if order > field.table_limit {
            return Err(Error::TableLimit { size: order, limit: field.table_limit }.into());
        }
    }
    Ok(q)
}

fn base_field(field: &FieldArgs) -> Result<FieldContext, Failure> {
    Ok(build_field_with_limit(field.p, field.n, field.table_limit)?)
}

fn extension(params: &FamilyParams) -> Result<ExtensionContext, Failure> {
    check_parameters(&params.field, Some(params.d), Some(params.m))?;
    let base = base_field(&params.field)?;
    Ok(build_extension_with_limit(&base, params.d, params.field.table_limit)?)
}

fn emit(output: &Output, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match &output.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn symbols_csv(symbols: &[u32]) -> String {
    let mut line = String::with_capacity(symbols.len() * 3);
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{s}");
    }
    line
}

#[derive(Serialize)]
struct SequenceJson<'a> {
    q: u64,
    d: u32,
    #[serde(rename = "M")]
    m: u64,
    l: Option<u64>,
    c: Option<u64>,
    period: usize,
    symbols: &'a [u32],
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    check_parameters(&args.field, args.d, Some(args.m))?;
    let base = base_field(&args.field)?;
    let (d, seq) = match args.d {
        None => (1, sidelnikov_sequence(&base, args.m)?),
        Some(d) => {
            let ext = build_extension_with_limit(&base, d, args.field.table_limit)?;
            let seq = match args.column {
                Some(l) => column_sequence(&ext, l, args.m)?,
                None => sidelnikov_sequence_ext(&ext, args.m)?,
            };
            (d, seq)
        }
    };
    let header = ExportHeader::for_sequence(base.q(), d, &seq);
    emit(&args.output, |out| match args.output.format.unwrap_or(Format::Text) {
        Format::Text => write_sequence(&mut { out }, &header, &seq),
        Format::Csv => writeln!(out, "{}", symbols_csv(seq.symbols())),
        Format::Json => json_line(
            out,
            &SequenceJson {
                q: header.q,
                d: header.d,
                m: header.m,
                l: header.l,
                c: header.c,
                period: seq.period(),
                symbols: seq.symbols(),
            },
        ),
    })?;
    Ok(Status::Pass)
}

pub fn family(args: &FamilyArgs) -> CmdResult {
    let ext = extension(&args.params)?;
    let family = build_family(&ext, args.params.m, args.params.policy)?;
    if let Some(path) = &args.payload {
        let mut file = BufWriter::new(File::create(path)?);
        family.write_payload(&mut file)?;
        file.flush()?;
    }
    let manifest = family.manifest();
    emit(&args.output, |out| match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_line(out, &manifest),
        Format::Csv => {
            writeln!(out, "c,l,d_l")?;
            for member in &family.members {
                writeln!(out, "{},{},{}", member.c, member.l, member.d_l)?;
            }
            Ok(())
        }
        Format::Text => {
            writeln!(out, "q={} d={} M={} policy={}", manifest.q, manifest.d, manifest.m, manifest.policy)?;
            writeln!(out, "representatives: {:?}", manifest.lambda)?;
            writeln!(out, "columns: {:?}", manifest.columns)?;
            writeln!(out, "members: {}", manifest.size)
        }
    })?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct CorrelateJson<'a> {
    correlation: &'a CorrelationReport,
    inequivalence: &'a InequivalenceReport,
}

#[derive(Serialize)]
struct PairJson {
    q: u64,
    d: u32,
    #[serde(rename = "M")]
    m: u64,
    l1: u64,
    l2: u64,
    tau: u64,
    re: f64,
    im: f64,
    magnitude: f64,
    /// `(d_l1 + d_l2 − 1)√q + 1`, or `q − 1` for the trivial case.
    bound: f64,
    within_bound: bool,
}

pub fn correlate(args: &CorrelateArgs) -> CmdResult {
    let ext = extension(&args.params)?;
    if let (Some(columns), Some(tau)) = (&args.column, args.tau) {
        return correlate_pair(args, &ext, columns[0], columns[1], tau);
    }
    let family = build_family(&ext, args.params.m, args.params.policy)?;
    let options = ScanOptions { argmax_limit: args.argmax_limit, ..ScanOptions::default() };
    let report = max_correlation(&family, options)?;
    let inequivalence = cyclic_inequivalence(&family.members);
    emit(&args.output, |out| match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_line(out, &CorrelateJson { correlation: &report, inequivalence: &inequivalence }),
        Format::Csv => write!(out, "{}", report.histogram_csv()),
        Format::Text => {
            writeln!(out, "q={} d={} M={} policy={}", report.q, report.d, report.m, report.policy)?;
            writeln!(out, "members: {}", report.family_size)?;
            writeln!(out, "correlations scanned: {}", report.correlations_scanned)?;
            writeln!(out, "delta_max: {:.6}", report.delta_max)?;
            writeln!(out, "bound: {:.6} ({})", report.bound, verdict(report.within_bound))?;
            writeln!(out, "pair bound violations: {}", report.pair_bound_violations)?;
            writeln!(out, "same-column violations: {}", report.same_column_violations)?;
            writeln!(out, "cyclically inequivalent: {}", inequivalence.inequivalent)
        }
    })?;
    let passed = report.passed() && inequivalence.inequivalent;
    if !passed && args.params.policy != Policy::Strict {
        eprintln!("warning: {} family fails its checks; exit status only reflects strict families", args.params.policy);
        return Ok(Status::Pass);
    }
    Ok(Status::from(passed))
}

fn correlate_pair(args: &CorrelateArgs, ext: &ExtensionContext, l1: u64, l2: u64, tau: u64) -> CmdResult {
    let m = args.params.m;
    let a = column_sequence(ext, l1, m)?;
    let b = column_sequence(ext, l2, m)?;
    let n = a.period() as u64;
    let value = cross_correlation(&a, &b, (tau % n) as usize)?;
    let q = ext.q();
    let trivial = l1 == l2 && tau.is_multiple_of(n);
    let bound = if trivial {
        (q - 1) as f64
    } else {
        let size = |l: u64| coset(l, ext.period(), q).size() as f64;
        (size(l1) + size(l2) - 1.0) * (q as f64).sqrt() + 1.0
    };
    let magnitude = value.norm();
    let pair = PairJson {
        q,
        d: ext.d(),
        m,
        l1,
        l2,
        tau: tau % n,
        re: value.re,
        im: value.im,
        magnitude,
        bound,
        within_bound: magnitude <= bound + seqfam_core::correlation::TOLERANCE,
    };
    emit(&args.output, |out| match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_line(out, &pair),
        Format::Csv => {
            writeln!(out, "l1,l2,tau,re,im,magnitude,bound")?;
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6}",
                pair.l1, pair.l2, pair.tau, pair.re, pair.im, pair.magnitude, pair.bound
            )
        }
        Format::Text => writeln!(
            out,
            "R(v_{}, v_{}; {}) = {:.6}{:+.6}i, |R| = {:.6}, bound {:.6} ({})",
            pair.l1,
            pair.l2,
            pair.tau,
            pair.re,
            pair.im,
            pair.magnitude,
            pair.bound,
            verdict(pair.within_bound)
        ),
    })?;
    Ok(Status::from(pair.within_bound))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

pub fn count(args: &CountArgs) -> CmdResult {
    let q = check_parameters(&args.field, None, args.m)?;
    let m = args.m.unwrap_or(q - 1);
    if m < 2 {
        return Err(Failure::usage(format!("q − 1 = {} admits no alphabet M ≥ 2", q - 1)));
    }
    let (lo, hi) = match (args.sweep, args.d) {
        (Some(range), _) => range,
        (None, Some(d)) => (d, d),
        (None, None) => return Err(Failure::usage("either --d or --sweep is required")),
    };
    if lo < 2 {
        return Err(Failure::usage("d must be at least 2"));
    }
    let reports = (lo..=hi)
        .map(|d| count_report(q, d, m))
        .collect::<Result<Vec<CountReport>, Error>>()?;
    let single = args.sweep.is_none();
    let default = if single { Format::Json } else { Format::Csv };
    emit(&args.output, |out| match args.output.format.unwrap_or(default) {
        Format::Json if single => json_line(out, &reports[0]),
        Format::Json => json_line(out, &reports),
        Format::Csv => write!(out, "{}", sweep_csv(&reports)),
        Format::Text => {
            for r in &reports {
                writeln!(
                    out,
                    "q={} d={} M={}: |Λ|={} family size={} asymptotic={:.3} ratio={:.6}",
                    r.q, r.d, r.m, r.lambda_size_formula, r.family_size, r.asymptotic, r.ratio
                )?;
            }
            Ok(())
        }
    })?;
    Ok(Status::from(reports.iter().all(CountReport::passed)))
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let ext = extension(&args.params)?;
    let summary: VerificationSummary =
        run_verification(&ext, args.params.m, args.params.policy, VerifyOptions::default())?;
    emit(&args.output, |out| match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_line(out, &summary),
        Format::Csv => {
            writeln!(out, "check,passed,detail")?;
            for check in &summary.checks {
                writeln!(out, "{},{},\"{}\"", check.name, check.passed, check.detail.replace('"', "\"\""))?;
            }
            Ok(())
        }
        Format::Text => {
            for check in &summary.checks {
                let tag = if check.passed { "PASS" } else { "FAIL" };
                writeln!(out, "[{tag}] {}: {}", check.name, check.detail)?;
            }
            writeln!(out, "overall: {}", if summary.passed { "PASS" } else { "FAIL" })
        }
    })?;
    Ok(Status::from(summary.passed))
}
