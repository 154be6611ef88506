//! The `detset` command line front end.
//!
//! ```text
//! detset dset    --p 5 --set 0,1 --n 2
//! detset witness --p 5 --set 0,1,4 --m 2 --n 2 --target 3
//! detset witness --p 7 --set 1,3 --cover
//! detset verify  all --seed 7 --threads 4
//! ```
//!
//! Exit codes: 0 success, 1 failed check, 2 budget exceeded, 3 target not
//! realizable, 4 coverage budget insufficient, 5 usage error.

mod suites;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::bounds::BoundReport;
use crate::enumerate::{constructive_witness, dset_cofactor, dset_naive, EnumBudget, Method};
use crate::error::{Error, Result};
use crate::gadgets::{coverage_certificate, synthesize_witness, GadgetWitness};
use crate::matrix::elem_to_json;
use crate::ring::Ring;
use crate::setalg::ElemSet;

pub use suites::{enumerated_instances, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_NOT_MEMBER: i32 = 3;
pub const EXIT_INSUFFICIENT: i32 = 4;
pub const EXIT_USAGE: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "detset", version, about = "Determinant sets of matrices over finite sets of a prime field or the integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute D_n(A) by enumeration.
    Dset(DsetArgs),
    /// Emit a verified matrix over A with a prescribed determinant.
    Witness(WitnessArgs),
    /// Run check suites and print one report per line.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RingSel {
    Prime,
    Int,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodSel {
    Naive,
    Cofactor,
    Both,
}

#[derive(Args, Debug)]
struct RingArgs {
    /// Prime modulus.
    #[arg(long)]
    p: Option<u64>,

    /// Ring: a prime field (needs --p) or the integers.
    #[arg(long, value_enum)]
    ring: Option<RingSel>,
}

impl RingArgs {
    fn ring(&self) -> Result<Ring> {
        match (self.ring, self.p) {
            (Some(RingSel::Int), None) => Ok(Ring::integers()),
            (Some(RingSel::Int), Some(_)) => Err(Error::InvalidArgument("--p conflicts with --ring int".into())),
            (_, Some(p)) => Ring::prime_field(p),
            (_, None) => Err(Error::MissingModulus),
        }
    }
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Maximum number of matrices to enumerate.
    #[arg(long, default_value_t = 100_000_000)]
    max_matrices: u64,

    /// Maximum enumeration time in seconds.
    #[arg(long, default_value_t = 300.0)]
    max_seconds: f64,
}

impl BudgetArgs {
    fn budget(&self, method: Method) -> Result<EnumBudget> {
        EnumBudget::new(self.max_matrices, self.max_seconds, method)
    }
}

#[derive(Args, Debug)]
struct DsetArgs {
    #[command(flatten)]
    ring: RingArgs,

    /// Entry set, e.g. 0,1,4.
    #[arg(long, allow_hyphen_values = true)]
    set: String,

    /// Matrix size.
    #[arg(long)]
    n: usize,

    #[arg(long, value_enum, default_value_t = MethodSel::Cofactor)]
    method: MethodSel,

    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    #[command(flatten)]
    ring: RingArgs,

    #[arg(long, allow_hyphen_values = true)]
    set: String,

    /// Number of products in the gadget.
    #[arg(long, requires = "n")]
    m: Option<usize>,

    /// Factors per product.
    #[arg(long, requires = "m")]
    n: Option<usize>,

    /// Even matrix size for the block-doubled construction over A - A.
    #[arg(long, conflicts_with_all = ["m", "n"])]
    size: Option<usize>,

    #[arg(long, allow_hyphen_values = true)]
    target: Option<BigInt>,

    /// Certify that every field element is a determinant.
    #[arg(long, conflicts_with_all = ["m", "n", "size", "target"])]
    cover: bool,

    /// Largest matrix size considered by --cover.
    #[arg(long, default_value_t = 64)]
    budget: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suites to run.
    #[arg(value_enum, default_value = "all")]
    suites: Vec<Suite>,

    /// Seed for randomized suites.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Random instances per randomized suite.
    #[arg(long, default_value_t = 1000)]
    trials: usize,

    /// Prime for the coverage suite.
    #[arg(long, default_value_t = 7)]
    p: u64,

    /// Entry set for the coverage suite.
    #[arg(long, default_value = "1,3", allow_hyphen_values = true)]
    set: String,

    /// Density exponent for the coverage suite.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,

    /// Largest matrix size considered by the coverage suite.
    #[arg(long, default_value_t = 64)]
    budget: usize,

    #[command(flatten)]
    enum_budget: BudgetArgs,
}

/// Result of one invocation with its captured streams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI on `args` (program name first), writing to the process's
/// stdout and stderr, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let out = run(args);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    out.code
}

/// Runs the CLI on `args` (program name first) with captured output.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut out = Outcome::default();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            out.code = EXIT_USAGE;
            out.stderr = format!("error: {e}\n");
            return out;
        }
    };
    let result = pool.install(|| dispatch(&cli, &mut out));
    match result {
        Ok(code) => out.code = code,
        Err(e) => {
            out.code = exit_code(&e);
            out.stderr.push_str(&format!("error: {e}\n"));
        }
    }
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, std::mem::take(&mut out.stdout)) {
            out.stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
            out.code = EXIT_USAGE;
        }
    }
    out
}

/// Exit code for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        Error::NotAMember(_) => EXIT_NOT_MEMBER,
        Error::Insufficient(_) => EXIT_INSUFFICIENT,
        Error::Verification(_) | Error::SingularBlock => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cli: &Cli, out: &mut Outcome) -> Result<i32> {
    match &cli.command {
        Command::Dset(a) => cmd_dset(a, cli.format, out),
        Command::Witness(a) => cmd_witness(a, cli.format, out),
        Command::Verify(a) => cmd_verify(a, cli.format, out),
    }
}

fn parse_set(ring: Ring, literal: &str, out: &mut Outcome) -> Result<ElemSet> {
    let (set, collapsed) = ElemSet::parse(ring, literal)?;
    if collapsed {
        out.stderr.push_str(&format!("warning: reduction into {ring} merged set elements; using {set} with {} element(s)\n", set.len()));
    }
    Ok(set)
}

fn elems(set: &ElemSet) -> Value {
    set.iter().map(|x| elem_to_json(&x)).collect()
}

fn line(out: &mut Outcome, s: impl AsRef<str>) {
    out.stdout.push_str(s.as_ref());
    out.stdout.push('\n');
}

fn cmd_dset(args: &DsetArgs, format: Format, out: &mut Outcome) -> Result<i32> {
    let ring = args.ring.ring()?;
    let a = parse_set(ring, &args.set, out)?;
    let (d, method, agree) = match args.method {
        MethodSel::Naive => (dset_naive(&a, args.n, &args.budget.budget(Method::Naive)?)?, "naive", None),
        MethodSel::Cofactor => (dset_cofactor(&a, args.n, &args.budget.budget(Method::Cofactor)?)?, "cofactor", None),
        MethodSel::Both => {
            let naive = dset_naive(&a, args.n, &args.budget.budget(Method::Naive)?)?;
            let cof = dset_cofactor(&a, args.n, &args.budget.budget(Method::Cofactor)?)?;
            let agree = naive == cof;
            if !agree {
                out.stderr.push_str(&format!("mismatch: naive has {} elements, cofactor has {}\n", naive.len(), cof.len()));
            }
            (naive, "both", Some(agree))
        }
    };
    match format {
        Format::Json => {
            let mut v = json!({
                "ring": ring.to_string(),
                "p": ring.modulus(),
                "set": elems(&a),
                "n": args.n,
                "method": method,
                "dset": elems(&d),
                "size": d.len(),
            });
            if let Some(agree) = agree {
                v["agree"] = agree.into();
            }
            line(out, v.to_string());
        }
        Format::Csv => {
            line(out, "ring,n,size,elements");
            let list: Vec<String> = d.iter().map(|x| x.to_string()).collect();
            line(out, format!("{ring},{},{},{}", args.n, d.len(), list.join(";")));
        }
        Format::Text => {
            line(out, d.to_string());
            line(out, format!("size {}", d.len()));
        }
    }
    Ok(if agree == Some(false) { EXIT_FAIL } else { EXIT_OK })
}

fn write_witness(w: &GadgetWitness, format: Format, out: &mut Outcome) {
    match format {
        Format::Json => line(out, w.to_json().to_string()),
        Format::Csv => {
            let m = w.matrix();
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
                line(out, row.join(","));
            }
        }
        Format::Text => {
            line(out, format!("det = {} (size {})", w.value(), w.size()));
            let m = w.matrix();
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:>3}")).collect();
                line(out, format!("  {}", row.join(" ")));
            }
        }
    }
}

fn cmd_witness(args: &WitnessArgs, format: Format, out: &mut Outcome) -> Result<i32> {
    let ring = args.ring.ring()?;
    let a = parse_set(ring, &args.set, out)?;
    if args.cover {
        let cert = coverage_certificate(&a, args.budget)?;
        let witnesses = cert.witnesses()?;
        match format {
            Format::Json => line(out, cert.to_json().to_string()),
            Format::Text => line(
                out,
                format!("D_{}(A) = {ring} for A = {a}: m = {}, n = {}, {} witnesses", cert.size(), cert.m(), cert.n(), witnesses.len()),
            ),
            Format::Csv => {}
        }
        for w in &witnesses {
            if format == Format::Csv {
                line(out, format!("# det = {}", w.value()));
            }
            write_witness(w, format, out);
        }
        return Ok(EXIT_OK);
    }
    let target = args
        .target
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--target is required unless --cover is given".into()))?;
    let w = match (args.m, args.n, args.size) {
        (Some(m), Some(n), None) => synthesize_witness(&a, m, n, target)?,
        (None, None, Some(size)) => constructive_witness(&a, size, target)?,
        _ => return Err(Error::InvalidArgument("give either --m and --n, or --size".into())),
    };
    write_witness(&w, format, out);
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, format: Format, out: &mut Outcome) -> Result<i32> {
    let ring = Ring::prime_field(args.p)?;
    let cover_set = parse_set(ring, &args.set, out)?;
    let cfg = suites::SuiteConfig {
        seed: args.seed,
        trials: args.trials,
        cor4: (cover_set, args.delta),
        cover_budget: args.budget,
        enum_budget: args.enum_budget.budget(Method::Cofactor)?,
    };
    let mut reports: Vec<BoundReport> = Vec::new();
    for suite in Suite::expand(&args.suites) {
        reports.extend(suites::run(suite, &cfg)?);
    }
    if format == Format::Csv {
        line(out, BoundReport::CSV_HEADER);
    }
    for r in &reports {
        let s = match format {
            Format::Json => r.to_json().to_string(),
            Format::Csv => r.to_csv(),
            Format::Text => r.to_text(),
        };
        line(out, s);
    }
    Ok(if reports.iter().all(BoundReport::ok) { EXIT_OK } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &str) -> Outcome {
        run(std::iter::once("detset").chain(args.split_whitespace()))
    }

    #[test]
    fn dset_examples() {
        let o = cli("dset --p 5 --set 0,1 --n 2");
        assert_eq!(o.code, 0, "{o:?}");
        let v: Value = serde_json::from_str(o.stdout.trim()).unwrap();
        assert_eq!(v["dset"], json!([0, 1, 4]));
        assert_eq!(v["size"], 3);
        let o = cli("dset --ring int --set 0 --n 3 --format text");
        assert_eq!(o.stdout, "{0}\nsize 1\n");
        let o = cli("dset --ring int --set -2,0,1 --n 2 --method both");
        assert_eq!(o.code, 0, "{o:?}");
        let o = cli("dset --p 5 --set 0,1,2,3,4 --n 4 --method naive --max-matrices 1000");
        assert_eq!(o.code, EXIT_BUDGET);
        assert!(o.stderr.contains("budget exceeded"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(cli("dset --set 0,1 --n 2").code, EXIT_USAGE);
        assert_eq!(cli("dset --p 6 --set 0,1 --n 2").code, EXIT_USAGE);
        assert_eq!(cli("dset --p 5 --set 0,x --n 2").code, EXIT_USAGE);
        assert_eq!(cli("frobnicate").code, EXIT_USAGE);
        let help = cli("--help");
        assert_eq!(help.code, 0);
        assert!(help.stdout.contains("dset"));
    }

    #[test]
    fn collapse_warning() {
        let o = cli("dset --p 7 --set 1,8 --n 1");
        assert_eq!(o.code, 0);
        assert!(o.stderr.contains("warning"));
    }

    #[test]
    fn witness_modes() {
        let o = cli("witness --p 5 --set 0,1,4 --m 2 --n 2 --target 3");
        assert_eq!(o.code, 0, "{o:?}");
        let v: Value = serde_json::from_str(o.stdout.trim()).unwrap();
        assert_eq!(v["value"], 3);
        assert_eq!(cli("witness --p 5 --set 0,1 --m 1 --n 1 --target 3").code, EXIT_NOT_MEMBER);
        let o = cli("witness --p 7 --set 1,3 --cover");
        assert_eq!(o.code, 0);
        assert_eq!(o.stdout.lines().count(), 8);
        assert_eq!(cli("witness --p 101 --set 0,1 --cover --budget 4").code, EXIT_INSUFFICIENT);
        let o = cli("witness --p 7 --set 1,3 --size 4 --target 6 --format text");
        assert_eq!(o.code, 0, "{o:?}");
        assert!(o.stdout.starts_with("det = 6"));
    }

    #[test]
    fn verify_small_suites() {
        let o = cli("verify synthesis cor4 example1 --format csv");
        assert_eq!(o.code, 0, "{o:?}");
        assert!(o.stdout.starts_with(BoundReport::CSV_HEADER));
        assert_eq!(o.stdout.lines().count(), 1 + 1 + 1 + 6);
    }
}
