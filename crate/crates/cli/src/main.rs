mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqfam_core::family::Policy;

#[derive(Parser, Debug)]
#[command(name = "seqfam", version, about = "Sidelnikov-based M-ary sequence families")]
struct Cli {
    /// Worker threads for the correlation scan (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a base, extended or column Sidelnikov sequence.
    Generate(GenerateArgs),
    /// Build the family and write its manifest and payload.
    Family(FamilyArgs),
    /// Scan all correlations of the family, or one pair of columns.
    Correlate(CorrelateArgs),
    /// Exact and asymptotic family sizes.
    Count(CountArgs),
    /// Run every check for one parameter set.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    pub p: u64,
    /// Degree of GF(q) over GF(p), q = p^n.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Log/exp tables larger than this many elements are refused.
    #[arg(long, env = "SEQFAM_TABLE_LIMIT", default_value_t = seqfam_core::field::DEFAULT_TABLE_LIMIT)]
    pub table_limit: u64,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Extension degree; omit for the base sequence over GF(q).
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long = "M")]
    pub m: u64,
    /// Emit column l of the extended sequence instead of the whole sequence.
    #[arg(long, requires = "d")]
    pub column: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct FamilyParams {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub d: u32,
    #[arg(long = "M")]
    pub m: u64,
    #[arg(long, default_value = "strict", value_parser = parse_policy)]
    pub policy: Policy,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub params: FamilyParams,
    /// Also write every member in the sequence export format.
    #[arg(long)]
    pub payload: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub params: FamilyParams,
    /// Two column indices: correlate v_l1 against v_l2 at --tau only.
    #[arg(long, num_args = 2, value_names = ["L1", "L2"], requires = "tau")]
    pub column: Option<Vec<u64>>,
    #[arg(long, requires = "column")]
    pub tau: Option<u64>,
    /// Maximum number of argmax witnesses reported.
    #[arg(long, default_value_t = 64)]
    pub argmax_limit: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, required_unless_present = "sweep")]
    pub d: Option<u32>,
    /// Alphabet size; defaults to q − 1.
    #[arg(long = "M")]
    pub m: Option<u64>,
    /// Inclusive range of extension degrees, e.g. 2..6.
    #[arg(long, conflicts_with = "d", value_parser = parse_range)]
    pub sweep: Option<(u32, u32)>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: FamilyParams,
    #[command(flatten)]
    pub output: Output,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: seqfam_core::Error| e.to_string())
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: u32 = lo.parse().map_err(|e| format!("{e}"))?;
    let hi: u32 = hi.trim_start_matches('=').parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Family(args) => commands::family(&args),
        Command::Correlate(args) => commands::correlate(&args),
        Command::Count(args) => commands::count(&args),
        Command::Verify(args) => commands::verify(&args),
    };
    match result {
        Ok(commands::Status::Pass) => ExitCode::SUCCESS,
        Ok(commands::Status::Fail) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
