//! `ck` command-line front end.
//!
//! Every subcommand writes one JSON report (`--format csv` is accepted by
//! `orbit-table` only). Exit codes: 0 when every check passes, 1 when a
//! check fails, 2 for invalid input.

pub mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::checks::{self, Check};
use crate::error::{CkError, Result};
use crate::indrep::{contraction_limit_check, Family, RepContext};
use crate::orbits::{apply, classify_orbit, coadjoint, orbit_invariant, Sign};
use crate::scalar::{Branch, Signature};

pub use table::{atlas_checks, orbit_table, OrbitRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

const EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Debug, Parser)]
#[command(name = "ck", version, about = "Cayley-Klein orthogonal groups: verification and orbit classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the coadjoint orbit of a character of SO(n+1; d, j').
    Classify(ClassifyArgs),
    /// Run the invariant suite for one signature.
    Verify(VerifyArgs),
    /// Monte Carlo check of left and right invariance of the measure.
    Measure(MeasureArgs),
    /// Check the induced representation operators.
    RepCheck(RepArgs),
    /// Tabulate orbit classes over all subgroup signatures.
    OrbitTable(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Args)]
struct Output {
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn parse_signature(s: &str) -> std::result::Result<Signature, String> {
    let sig = Signature::parse(s).map_err(|e| e.to_string())?;
    if sig.n() < 2 {
        return Err(format!("signature needs at least two entries, got {}", sig.n()));
    }
    Ok(sig)
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Full signature `j_1,...,j_n`; the orbit lives on the tail `j_2,...,j_n`.
    #[arg(long, value_parser = parse_signature)]
    signature: Signature,
    /// Character components `h_1,...,h_n`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    h: Vec<f64>,
    #[arg(long, env = "CK_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_signature)]
    signature: Signature,
    #[arg(long, env = "CK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[arg(long, value_parser = parse_signature)]
    signature: Signature,
    #[arg(long, env = "CK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Half-width of the box used for noncompact blocks.
    #[arg(long, default_value_t = 2.0)]
    truncation: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct RepArgs {
    /// Full signature with `j_1 = d`.
    #[arg(long, value_parser = parse_signature)]
    signature: Signature,
    #[arg(long, value_enum, default_value_t = FamilyArg::Real)]
    family: FamilyArg,
    #[arg(long = "R", default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    sign: SignArg,
    /// Axis `m` of an imaginary-radius series; defaults to the classified axis.
    #[arg(long)]
    axis: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, env = "CK_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Group size: subgroup signatures have `n - 1` entries.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub version: &'static str,
    pub wall_time: f64,
}

/// Machine-readable outcome of one subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub signature: Option<String>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub result: Value,
    pub metadata: Metadata,
}

impl Report {
    fn new(subcommand: &str, signature: Option<&Signature>, seed: Option<u64>, checks: Vec<Check>, result: Value) -> Self {
        Self {
            subcommand: subcommand.into(),
            signature: signature.map(|s| s.to_string()),
            pass: checks.iter().all(|c| c.pass),
            checks,
            result,
            metadata: Metadata {
                seed,
                version: env!("CARGO_PKG_VERSION"),
                wall_time: 0.0,
            },
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn classify(a: &ClassifyArgs) -> Result<Report> {
    let sub = a.signature.sub(1)?;
    let cls = classify_orbit(&sub, &a.h)?;
    let value = orbit_invariant(&sub, &cls.representative)?;
    let expected = match cls.radius_kind {
        crate::orbits::RadiusKind::Zero { .. } => 0.0,
        _ => cls.value,
    };
    let mut checks = vec![Check::new(
        "representative_invariant",
        (value - expected).abs(),
        1e-12 * expected.abs().max(1.0),
    )];
    if let Some(st) = &cls.stabilizer {
        let mut rng = checks::rng(a.seed);
        let n = a.signature.n();
        let mut dev = 0.0f64;
        for _ in 0..100 {
            let k = st.element(n, || rand::Rng::random_range(&mut rng, -1.0..=1.0));
            let moved = apply(&coadjoint(&sub, &k)?, &cls.representative);
            dev = moved
                .iter()
                .zip(&cls.representative)
                .map(|(x, y)| (x - y).abs())
                .fold(dev, f64::max);
        }
        checks.push(Check::new("stabilizer_fixes_representative", dev, 1e-10));
    }
    Ok(Report::new("classify", Some(&a.signature), Some(a.seed), checks, to_value(&cls)))
}

fn verify(a: &VerifyArgs) -> Result<Report> {
    if a.trials == 0 {
        return Err(CkError::Config("trials must be positive".into()));
    }
    let mut checks = checks::verify_signature(&a.signature, a.trials, a.seed)?;
    let mut result = json!({ "trials": a.trials });
    if a.signature.branches().contains(&Branch::Parabolic) {
        let rep = contraction_limit_check(&a.signature, &EPSILONS, a.seed)?;
        checks.extend(rep.quantities.iter().map(|q| q.as_check()));
        result["contraction"] = to_value(&rep);
    }
    Ok(Report::new("verify", Some(&a.signature), Some(a.seed), checks, result))
}

fn measure(a: &MeasureArgs) -> Result<Report> {
    let (checks, table) = checks::haar_invariance(&a.signature, a.samples, a.seed, a.truncation)?;
    let estimates: Vec<Value> = table
        .iter()
        .enumerate()
        .map(|(i, t)| {
            json!({
                "function": i + 1,
                "plain": { "estimate": t[0], "std_error": t[1] },
                "left": { "estimate": t[2], "std_error": t[3] },
                "right": { "estimate": t[4], "std_error": t[5] },
            })
        })
        .collect();
    let result = json!({ "samples": a.samples, "truncation": a.truncation, "estimates": estimates });
    Ok(Report::new("measure", Some(&a.signature), Some(a.seed), checks, result))
}

fn rep_check(a: &RepArgs) -> Result<Report> {
    if a.trials == 0 {
        return Err(CkError::Config("trials must be positive".into()));
    }
    let sig = &a.signature;
    let family = match a.family {
        FamilyArg::Real => Family::Positive { r: a.r },
        FamilyArg::Imaginary => {
            let axis = match a.axis {
                Some(m) => m,
                None => {
                    let sub = sig.sub(1)?;
                    let w = crate::orbits::invariant_weights(&sub);
                    (1..=sig.n()).rev().find(|&m| w[m - 1] < 0.0).ok_or_else(|| {
                        CkError::Config(format!("signature {sig} admits no imaginary-radius orbit"))
                    })?
                }
            };
            Family::Imaginary { rho: a.rho, axis }
        }
    };
    let sign: Sign = a.sign.into();
    let ctx = RepContext::new(sig, family, sign)?;
    let mut rng = checks::rng(a.seed);
    let mut out = checks::homomorphism(&ctx, a.trials, 5, &mut rng)?;
    let other = match sign {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    };
    let ctx2 = RepContext::new(sig, family, other)?;
    for mut c in checks::homomorphism(&ctx2, a.trials.div_ceil(4), 5, &mut rng)? {
        c.name = format!("opposite_sign_{}", c.name);
        out.push(c);
    }
    let tokens = sig.to_string();
    if tokens == "d,d" && a.family == FamilyArg::Real {
        out.extend(checks::heisenberg_suite(a.trials.max(100), &mut rng)?);
    }
    if tokens == "d,1" && a.family == FamilyArg::Real {
        out.push(checks::unitarity_circle(a.r, 10, 5, 2048, &mut rng)?);
    }
    let result = json!({
        "family": to_value(&family),
        "sign": to_value(&sign),
        "families": ctx.families,
        "character": ctx.character(),
        "trials": a.trials,
    });
    Ok(Report::new("rep-check", Some(sig), Some(a.seed), out, result))
}

fn table_report(a: &TableArgs) -> Result<(Report, Vec<OrbitRow>)> {
    let rows = orbit_table(a.n)?;
    let checks = atlas_checks(&rows);
    let flagged = rows.iter().filter(|r| r.discrepancy).count();
    let result = json!({ "n": a.n, "flagged": flagged, "rows": to_value(&rows) });
    Ok((Report::new("orbit-table", None, None, checks, result), rows))
}

fn csv_rows(rows: &[OrbitRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CkError::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CkError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit(out: &Output, text: &str) -> std::io::Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()
        }
    }
}

fn execute(cmd: &Command) -> Result<(String, &Output, bool)> {
    let start = Instant::now();
    let (mut report, out, csv) = match cmd {
        Command::Classify(a) => (classify(a)?, &a.out, None),
        Command::Verify(a) => (verify(a)?, &a.out, None),
        Command::Measure(a) => (measure(a)?, &a.out, None),
        Command::RepCheck(a) => (rep_check(a)?, &a.out, None),
        Command::OrbitTable(a) => {
            let (r, rows) = table_report(a)?;
            (r, &a.out, Some(rows))
        }
    };
    report.metadata.wall_time = start.elapsed().as_secs_f64();
    let text = match (out.format, csv) {
        (Format::Json, _) => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        (Format::Csv, Some(rows)) => csv_rows(&rows)?,
        (Format::Csv, None) => return Err(CkError::Config("--format csv is only available for orbit-table".into())),
    };
    Ok((text, out, report.pass))
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<S: AsRef<str>>(args: &[S]) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok((text, out, pass)) => {
            if let Err(e) = emit(out, &text) {
                eprintln!("error: cannot write report: {e}");
                return EXIT_INVALID;
            }
            if pass {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
