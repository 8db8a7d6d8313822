//! Command-line front end: single-query, batch, and discriminant-ideal
//! modes, with optional machine-readable JSON output, a decision-path
//! explainer, and a built-in result auditor.
//!
//! Exit codes: 0 success, 2 invalid input, 3 defect-table miss, 4 resource
//! ceiling, 1 internal error (including audit violations under `--verify`).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use ptord::arith::{is_prime, Valuation};
use ptord::engine::{compute_degree, discriminant_exponent, ComputeOptions, DegreeResult};
use ptord::error::Error;
use ptord::oracle::check_consistency;
use ptord::reduction::{DefectSource, DefectTable, ReductionKind};
use ptord::CurveModel;

#[derive(Parser)]
#[command(
    name = "ptord",
    version,
    about = "Degree of the p-torsion field of an elliptic curve over the ell-adic numbers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute d = [Q_ell(E_p) : Q_ell] for a single curve
    Compute(ComputeArgs),
    /// Evaluate a CSV file of queries, one JSON document per row
    Batch(BatchArgs),
    /// Exponent of the discriminant ideal, (ell)^{d*D/e}
    Discriminant(DiscriminantArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// Integral Weierstrass coefficients a1,a2,a3,a4,a6
    #[arg(long, value_name = "A1,A2,A3,A4,A6", allow_hyphen_values = true)]
    a_invariants: Option<String>,
    /// c4,c6 shortcut: builds y^2 = x^3 - 27*c4*x - 54*c6
    #[arg(
        long,
        value_name = "C4,C6",
        allow_hyphen_values = true,
        conflicts_with = "a_invariants"
    )]
    c_invariants: Option<String>,
}

#[derive(Args)]
struct EngineArgs {
    /// Residue characteristic of the base field Q_ell
    #[arg(long)]
    ell: u64,
    /// Torsion prime (odd, different from ell)
    #[arg(long)]
    p: u64,
    /// Semistability defect override, bypassing table lookup
    #[arg(long, value_name = "E")]
    defect: Option<u64>,
    /// Seed for the randomized endomorphism-index test
    /// (default: env PTORD_SEED, else 0)
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Replacement defect table file
    #[arg(long, value_name = "FILE")]
    defect_table: Option<PathBuf>,
    /// Trust the input model to be ell-minimal (skips fiber-type analysis)
    #[arg(long)]
    assume_minimal: bool,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Emit a single JSON document instead of the human-readable line
    #[arg(long)]
    json: bool,
    /// Print the decision path (reduction data and each recorded predicate)
    #[arg(long)]
    explain: bool,
    /// Audit the result with the consistency checker; violations exit 1
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// CSV input with header label,a1,a2,a3,a4,a6,ell,p
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// JSON-lines output file (default: stdout)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Worker threads (default: one per CPU)
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for the randomized endomorphism-index test
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Replacement defect table file
    #[arg(long, value_name = "FILE")]
    defect_table: Option<PathBuf>,
}

#[derive(Args)]
struct DiscriminantArgs {
    /// Torsion-field degree d (numeric form; else computed from the curve)
    #[arg(long)]
    d: Option<u64>,
    /// Semistability defect e (numeric form; else computed from the curve)
    #[arg(long, requires = "d")]
    e: Option<u64>,
    /// Different exponent D of Q_ell(E_p) / Q_ell
    #[arg(long, value_name = "D")]
    different: u64,
    #[command(flatten)]
    curve: CurveArgs,
    /// Residue characteristic (also names the ideal generator)
    #[arg(long)]
    ell: u64,
    /// Torsion prime (curve form only)
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, value_name = "E")]
    defect: Option<u64>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    defect_table: Option<PathBuf>,
    #[arg(long)]
    assume_minimal: bool,
    /// Emit a JSON document instead of text
    #[arg(long)]
    json: bool,
}

// ---------------------------------------------------------------------------
// output documents (field order is the documented JSON schema)

#[derive(Serialize)]
struct ReductionDoc {
    kind: &'static str,
    e: Option<u64>,
    split: Option<bool>,
}

#[derive(Serialize)]
struct IntermediatesDoc {
    a: Option<i64>,
    n: Option<u64>,
    r: u64,
    delta: u64,
    alpha: Option<[u64; 2]>,
    beta: Option<[u64; 2]>,
    vj: Option<i64>,
    pth_power_j: Option<bool>,
    b_divisible: Option<bool>,
    twist_u: Option<i64>,
}

#[derive(Serialize)]
struct VerifyDoc {
    violations: Vec<String>,
}

#[derive(Serialize)]
struct ResultDoc {
    label: Option<String>,
    ell: u64,
    p: u64,
    d: u64,
    branch: &'static str,
    reduction: ReductionDoc,
    intermediates: IntermediatesDoc,
    verify: VerifyDoc,
}

#[derive(Serialize)]
struct ErrorDoc {
    label: Option<String>,
    error: String,
    code: u8,
}

fn kind_token(kind: ReductionKind) -> &'static str {
    match kind {
        ReductionKind::Good => "good",
        ReductionKind::Multiplicative => "multiplicative",
        ReductionKind::AdditivePotentiallyMultiplicative => "additive-potentially-multiplicative",
        ReductionKind::AdditivePotentiallyGood => "additive-potentially-good",
    }
}

fn result_doc(label: Option<String>, res: &DegreeResult) -> ResultDoc {
    let im = &res.intermediates;
    ResultDoc {
        label,
        ell: res.ell,
        p: res.p,
        d: res.d,
        branch: res.branch,
        reduction: ReductionDoc {
            kind: kind_token(res.reduction.kind),
            e: res.reduction.e,
            split: res.reduction.split,
        },
        intermediates: IntermediatesDoc {
            a: im.a,
            n: im.n,
            r: im.r,
            delta: im.delta,
            alpha: im.alpha.map(|z| [z.x0, z.x1]),
            beta: im.beta.map(|z| [z.x0, z.x1]),
            vj: match im.vj {
                Some(Valuation::Finite(v)) => Some(v),
                _ => None,
            },
            pth_power_j: im.pth_power_j,
            b_divisible: im.b_divisible,
            twist_u: im.twist_u,
        },
        verify: VerifyDoc {
            violations: check_consistency(res),
        },
    }
}

// ---------------------------------------------------------------------------
// errors and exit codes

struct AppError {
    code: u8,
    message: String,
}

impl AppError {
    fn input(message: impl Into<String>) -> AppError {
        AppError { code: 2, message: message.into() }
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> AppError {
        AppError { code: exit_code(&e), message: e.to_string() }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) => 2,
        Error::DefectTableMiss { .. } => 3,
        Error::ResourceCeiling(_) => 4,
        Error::Inconsistency(_) => 1,
    }
}

// ---------------------------------------------------------------------------
// input parsing

fn parse_int_list(text: &str, expected: usize, what: &str) -> Result<Vec<BigInt>, AppError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != expected {
        return Err(AppError::input(format!(
            "{what} needs {expected} comma-separated integers, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<BigInt>()
                .map_err(|_| AppError::input(format!("{what}: `{s}` is not an integer")))
        })
        .collect()
}

fn parse_curve(curve: &CurveArgs) -> Result<CurveModel, AppError> {
    match (&curve.a_invariants, &curve.c_invariants) {
        (Some(a), None) => {
            let v = parse_int_list(a, 5, "--a-invariants")?;
            Ok(CurveModel::new(
                v[0].clone(),
                v[1].clone(),
                v[2].clone(),
                v[3].clone(),
                v[4].clone(),
            )?)
        }
        (None, Some(c)) => {
            let v = parse_int_list(c, 2, "--c-invariants")?;
            Ok(CurveModel::from_c_invariants(&v[0], &v[1])?)
        }
        (None, None) => Err(AppError::input(
            "a curve is required: pass --a-invariants or --c-invariants",
        )),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, AppError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("PTORD_SEED") {
        Ok(text) => text.trim().parse::<u64>().map_err(|_| {
            AppError::input(format!("PTORD_SEED must be an unsigned integer, got `{text}`"))
        }),
        Err(_) => Ok(0),
    }
}

fn load_table(path: &Option<PathBuf>) -> Result<Option<DefectTable>, AppError> {
    match path {
        Some(p) => Ok(Some(DefectTable::load(p)?)),
        None => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// compute

fn explain(res: &DegreeResult, out: &mut impl Write) -> std::io::Result<()> {
    let m = &res.minimal_model;
    writeln!(
        out,
        "minimal model at {}: [{}, {}, {}, {}, {}]",
        res.ell, m.a1, m.a2, m.a3, m.a4, m.a6
    )?;
    if res.scale_exponent > 0 {
        writeln!(
            out,
            "input was non-minimal: coordinates scaled down by {}^{}",
            res.ell, res.scale_exponent
        )?;
    }
    match (res.kodaira, res.conductor_exponent) {
        (Some(k), Some(f)) => writeln!(
            out,
            "reduction: {} (Kodaira type {k}, conductor exponent {f})",
            res.reduction.kind
        )?,
        _ => writeln!(out, "reduction: {} (minimality assumed)", res.reduction.kind)?,
    }
    if let Some(split) = res.reduction.split {
        writeln!(out, "split torus: {}", if split { "yes" } else { "no" })?;
    }
    if let Some(e) = res.reduction.e {
        let source = match res.reduction.defect_source {
            Some(DefectSource::Formula51) => "closed form 12/gcd(v(disc), 12)",
            Some(DefectSource::BundledTable) => "valuation-table lookup",
            Some(DefectSource::UserOverride) => "user override",
            None => "unknown",
        };
        writeln!(out, "semistability defect e = {e} ({source})")?;
    }
    let im = &res.intermediates;
    writeln!(
        out,
        "orders mod p: r = ord({}) = {}, delta = ord(-{}) = {}",
        res.ell, im.r, res.ell, im.delta
    )?;
    if let Some(u) = im.twist_u {
        writeln!(out, "good quadratic twist by u = {u}")?;
    }
    if let Some(a) = im.a {
        writeln!(out, "trace of Frobenius of the auxiliary good curve: a = {a}")?;
    }
    if let (Some(alpha), Some(beta), Some(n)) = (im.alpha, im.beta, im.n) {
        writeln!(
            out,
            "roots of X^2 - aX + {} in F_(p^2): alpha = {alpha}, beta = {beta}; n = lcm of their orders = {n}",
            res.ell
        )?;
    }
    if let Some(Valuation::Finite(v)) = im.vj {
        writeln!(out, "v(j) = {v}")?;
    }
    if let Some(pth) = im.pth_power_j {
        writeln!(
            out,
            "j is a p-th power in Q_ell*: {}",
            if pth { "yes" } else { "no" }
        )?;
    }
    if let Some(b) = im.b_divisible {
        writeln!(
            out,
            "p divides the endomorphism-ring index: {}",
            if b { "yes" } else { "no" }
        )?;
    }
    writeln!(out, "branch {}: d = {}", res.branch, res.d)?;
    Ok(())
}

fn run_compute(args: &ComputeArgs) -> Result<(), AppError> {
    let model = parse_curve(&args.curve)?;
    let seed = resolve_seed(args.engine.seed)?;
    let table = load_table(&args.engine.defect_table)?;
    let opts = ComputeOptions {
        seed,
        defect_override: args.engine.defect,
        defect_table: table.as_ref(),
        assume_minimal: args.engine.assume_minimal,
    };
    let res = compute_degree(&model, args.engine.ell, args.engine.p, opts)?;
    let doc = result_doc(None, &res);

    if args.explain {
        // keep stdout machine-readable under --json: explain goes to stderr
        if args.json {
            explain(&res, &mut std::io::stderr()).ok();
        } else {
            explain(&res, &mut std::io::stdout()).map_err(|e| AppError {
                code: 1,
                message: format!("cannot write output: {e}"),
            })?;
        }
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        println!("d = {}  (branch {})", res.d, res.branch);
        if args.verify && doc.verify.violations.is_empty() {
            println!("verify: ok");
        }
    }
    if args.verify && !doc.verify.violations.is_empty() {
        for v in &doc.verify.violations {
            eprintln!("violation: {v}");
        }
        return Err(AppError { code: 1, message: "result failed verification".into() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// batch

#[derive(Deserialize)]
struct QueryRecord {
    label: Option<String>,
    a1: String,
    a2: String,
    a3: String,
    a4: String,
    a6: String,
    ell: u64,
    p: u64,
    #[serde(default)]
    defect: Option<u64>,
    #[serde(default)]
    assume_minimal: Option<bool>,
}

fn process_row(
    row: Result<QueryRecord, csv::Error>,
    seed: u64,
    table: Option<&DefectTable>,
) -> (String, bool) {
    let record = match row {
        Ok(r) => r,
        Err(e) => {
            let doc = ErrorDoc { label: None, error: format!("malformed row: {e}"), code: 2 };
            return (serde_json::to_string(&doc).expect("serializable"), false);
        }
    };
    let label = record.label.clone();
    let outcome = (|| -> Result<ResultDoc, AppError> {
        let ints: Result<Vec<BigInt>, AppError> =
            [&record.a1, &record.a2, &record.a3, &record.a4, &record.a6]
                .iter()
                .map(|s| {
                    s.trim().parse::<BigInt>().map_err(|_| {
                        AppError::input(format!("`{s}` is not an integer"))
                    })
                })
                .collect();
        let v = ints?;
        let model =
            CurveModel::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone(), v[4].clone())?;
        let opts = ComputeOptions {
            seed,
            defect_override: record.defect,
            defect_table: table,
            assume_minimal: record.assume_minimal.unwrap_or(false),
        };
        let res = compute_degree(&model, record.ell, record.p, opts)?;
        Ok(result_doc(label.clone(), &res))
    })();
    match outcome {
        Ok(doc) => (serde_json::to_string(&doc).expect("serializable"), true),
        Err(e) => {
            let doc = ErrorDoc { label, error: e.message, code: e.code };
            (serde_json::to_string(&doc).expect("serializable"), false)
        }
    }
}

fn run_batch(args: &BatchArgs) -> Result<(), AppError> {
    let seed = resolve_seed(args.seed)?;
    let table = load_table(&args.defect_table)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(&args.input)
        .map_err(|e| AppError::input(format!("cannot read {}: {e}", args.input.display())))?;

    let empty = reader.headers().map(|h| h.is_empty()).unwrap_or(true);
    if !empty {
        let headers = reader
            .headers()
            .map_err(|e| AppError::input(format!("bad CSV header: {e}")))?;
        for required in ["label", "a1", "a2", "a3", "a4", "a6", "ell", "p"] {
            if !headers.iter().any(|h| h == required) {
                return Err(AppError::input(format!(
                    "CSV header must name the column `{required}` \
                     (expected label,a1,a2,a3,a4,a6,ell,p)"
                )));
            }
        }
    }

    let rows: Vec<Result<QueryRecord, csv::Error>> = reader.deserialize().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| AppError::input(format!("cannot build worker pool: {e}")))?;
    // the indexed parallel map preserves input order in the collected vector
    let results: Vec<(String, bool)> = pool.install(|| {
        use rayon::prelude::*;
        rows.into_par_iter()
            .map(|row| process_row(row, seed, table.as_ref()))
            .collect()
    });

    let mut sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| {
            AppError::input(format!("cannot create {}: {e}", path.display()))
        })?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut all_ok = true;
    for (line, ok) in &results {
        writeln!(sink, "{line}")
            .map_err(|e| AppError { code: 1, message: format!("cannot write output: {e}") })?;
        all_ok &= ok;
    }
    sink.flush()
        .map_err(|e| AppError { code: 1, message: format!("cannot write output: {e}") })?;
    if !all_ok {
        return Err(AppError { code: 2, message: "some batch rows failed".into() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// discriminant

#[derive(Serialize)]
struct DiscriminantDoc {
    ell: u64,
    d: u64,
    e: u64,
    different: u64,
    exponent: u64,
    ideal: String,
}

fn run_discriminant(args: &DiscriminantArgs) -> Result<(), AppError> {
    if !is_prime(args.ell) {
        return Err(AppError::input(format!("{} is not prime", args.ell)));
    }
    let (d, e) = match args.d {
        Some(d) => {
            let e = args
                .e
                .ok_or_else(|| AppError::input("--d also requires --e"))?;
            if args.curve.a_invariants.is_some() || args.curve.c_invariants.is_some() {
                return Err(AppError::input(
                    "pass either --d/--e or a curve, not both",
                ));
            }
            (d, e)
        }
        None => {
            let model = parse_curve(&args.curve)?;
            let p = args
                .p
                .ok_or_else(|| AppError::input("curve form requires --p"))?;
            let seed = resolve_seed(args.seed)?;
            let table = load_table(&args.defect_table)?;
            let opts = ComputeOptions {
                seed,
                defect_override: args.defect,
                defect_table: table.as_ref(),
                assume_minimal: args.assume_minimal,
            };
            let res = compute_degree(&model, args.ell, p, opts)?;
            // semistable curves need no extension (e = 1); the potentially
            // multiplicative case reaches a split torus after a ramified
            // quadratic twist (e = 2)
            let e = res.reduction.e.unwrap_or(match res.reduction.kind {
                ReductionKind::AdditivePotentiallyMultiplicative => 2,
                _ => 1,
            });
            (res.d, e)
        }
    };
    let exponent = discriminant_exponent(d, e, args.different)?;
    let ideal = format!("({})^{exponent}", args.ell);
    if args.json {
        let doc = DiscriminantDoc {
            ell: args.ell,
            d,
            e,
            different: args.different,
            exponent,
            ideal,
        };
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        println!("exponent d*D/e = {exponent}");
        println!("{ideal}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute(args) => run_compute(args),
        Command::Batch(args) => run_batch(args),
        Command::Discriminant(args) => run_discriminant(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
