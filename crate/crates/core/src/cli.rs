//! Command-line front end. Every command prints one JSON report.
//!
//! Exit codes: 0 certified or success, 2 inconclusive, 1 usage or data error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::data::{self, DataFile};
use crate::error::{Error, Result};
use crate::geometry::{self, PointBoundInput};
use crate::lseries::{self, ExclusionVerdict, NonvanishingVerdict, Theorem2Verdict};
use crate::moments::{self, BoundMode, MomentQuery, Sign, Space, TailParams};
use crate::rigor::Enclosure;
use crate::thresholds::{self, Condition, ConditionKind, Family};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "nvcert", version, about = "Certified nonvanishing of L'(f,1) via trace-formula moment bounds")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct GlobalArgs {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Enclose one twisted first moment.
    Moments(MomentsArgs),
    /// Scan prime levels for the minimal certified prime.
    Thresholds(ThresholdsArgs),
    /// Per-level verdict from newform data.
    Certify(CertifyArgs),
    /// Enclose L'(f,1) (or L(f,1)) of one newform.
    Lprime(LprimeArgs),
    /// Bound the number of rational points.
    Pointbound(PointboundArgs),
    /// Genus of X0+(N) or Xns+(N).
    Genus(GenusArgs),
    /// Single-curve exclusion at square levels.
    Screen(ScreenArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FamilyArg {
    X0plus,
    Xnsplus,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::X0plus => Family::X0plus,
            FamilyArg::Xnsplus => Family::Xnsplus,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ConditionArg {
    A1,
    A2,
    Ratio,
}

impl From<ConditionArg> for ConditionKind {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::A1 => ConditionKind::A1Positive,
            ConditionArg::A2 => ConditionKind::A2Positive,
            ConditionArg::Ratio => ConditionKind::RatioInUnitInterval,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BoundModeArg {
    First,
    Improved,
}

impl From<BoundModeArg> for BoundMode {
    fn from(m: BoundModeArg) -> Self {
        match m {
            BoundModeArg::First => BoundMode::First,
            BoundModeArg::Improved => BoundMode::Improved,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MomentModeArg {
    First,
    Improved,
    Numeric,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SpaceArg {
    Full,
    New,
}

#[derive(Args, Debug, Serialize)]
struct MomentsArgs {
    #[arg(long, default_value_t = 1)]
    m: u64,
    /// The level M, or the prime N when --space new (level N²).
    #[arg(long)]
    level: u64,
    #[arg(long, value_enum, default_value = "plus")]
    sign: SignArg,
    #[arg(long, value_enum, default_value = "full")]
    space: SpaceArg,
    #[arg(long, value_enum, default_value = "first")]
    mode: MomentModeArg,
    /// Numeric mode: largest c summed explicitly.
    #[arg(long)]
    c_max: Option<u64>,
    /// Numeric mode: largest d summed explicitly.
    #[arg(long)]
    d_max: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct ThresholdsArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, value_enum)]
    condition: ConditionArg,
    #[arg(long, value_enum, default_value = "first")]
    mode: BoundModeArg,
    /// Largest level scanned.
    #[arg(long)]
    max: u64,
    /// Smallest level scanned (default: the regime floor).
    #[arg(long)]
    min: Option<u64>,
    /// Recheck the boundary verdicts in 320-bit arithmetic.
    #[arg(long)]
    audit: bool,
    /// Write (prime, lo, hi) of the decisive quantity as CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    level: u64,
    #[arg(long)]
    newforms: PathBuf,
    /// Dimension of the Fricke +1 new subspace (default: genus of X0+(M) for prime M).
    #[arg(long)]
    plus_dim: Option<u64>,
    /// Largest truncation tried.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    #[arg(long)]
    audit: bool,
}

#[derive(Args, Debug, Serialize)]
struct LprimeArgs {
    #[arg(long)]
    newforms: PathBuf,
    #[arg(long)]
    label: String,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    audit: bool,
}

#[derive(Args, Debug, Serialize)]
struct PointboundArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    genus: u64,
    #[arg(long)]
    fp: u64,
    #[arg(long, default_value_t = 1)]
    nv: u64,
}

#[derive(Args, Debug, Serialize)]
struct GenusArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    level: u64,
    /// JSONL table of dim S_2(Γ0(N²))^(+,new) (default: bundled table).
    #[arg(long)]
    dimensions: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ScreenArgs {
    #[arg(long)]
    curves: PathBuf,
    /// Restrict to these prime levels N (conductor N²).
    #[arg(long, value_delimiter = ',')]
    levels: Vec<u64>,
}

/// Machine-readable output of one command.
#[derive(Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub version: &'static str,
    pub arithmetic: Vec<&'static str>,
    pub inputs: Inputs,
    pub verdict: &'static str,
    pub results: Value,
    pub timing: Timing,
}

#[derive(Serialize)]
pub struct Inputs {
    pub parameters: Value,
    pub files: Vec<DataFile>,
}

#[derive(Serialize)]
pub struct Timing {
    pub runtime_ms: u128,
}

struct Outcome {
    verdict: &'static str,
    results: Value,
    files: Vec<DataFile>,
    audit: bool,
}

impl Outcome {
    fn exit_code(&self) -> i32 {
        match self.verdict {
            "inconclusive" => EXIT_INCONCLUSIVE,
            _ => EXIT_OK,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports are serializable")
}

fn bound_mode_for(family: Family, prime: u64) -> BoundMode {
    if prime >= thresholds::regime_floor(family, BoundMode::Improved) {
        BoundMode::Improved
    } else {
        BoundMode::First
    }
}

fn moments_cmd(a: &MomentsArgs) -> Result<Outcome> {
    let sign = match a.sign {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
    };
    let space = match a.space {
        SpaceArg::Full => Space::Full,
        SpaceArg::New => Space::New,
    };
    let est = match (a.mode, space) {
        (MomentModeArg::Numeric, _) => {
            let q = match (space, sign) {
                (Space::New, _) => MomentQuery::square_new(a.m, a.level)?,
                (_, Sign::Plus) => MomentQuery::plus(a.m, a.level)?,
                (_, Sign::Minus) => MomentQuery::minus(a.m, a.level)?,
            };
            let level = q.level;
            let mut tail = TailParams::default_for(level);
            if let Some(c) = a.c_max {
                tail.c_max = c;
            }
            if let Some(d) = a.d_max {
                tail.d_max = d;
            }
            moments::moment_numeric(&q, &tail)?
        }
        (mode, Space::New) => {
            let mode = if matches!(mode, MomentModeArg::Improved) { BoundMode::Improved } else { BoundMode::First };
            moments::moment_square_new_bound(a.m, a.level, mode)?
        }
        (mode, Space::Full) => {
            let mode = if matches!(mode, MomentModeArg::Improved) { BoundMode::Improved } else { BoundMode::First };
            match sign {
                Sign::Plus => moments::moment_plus_bound(&MomentQuery::plus(a.m, a.level)?, mode)?,
                Sign::Minus => moments::moment_minus_bound(a.m, a.level)?,
            }
        }
    };
    let positive = est.normalized.is_positive();
    let mut results = json!({ "estimate": to_value(&est), "moment_times_4pi": to_value(&(est.normalized * (4.0 * std::f64::consts::PI))) });
    if est.mode == moments::EstimateMode::BoundImproved {
        // Coefficient of 1/√N in the T(1) term against the stated 6.3.
        let k = moments::t1_upper_constant(a.m);
        results["t1_constant"] = json!({ "certified": to_value(&k), "stated": 6.3, "exceeds_stated": k.hi() > 6.3 });
    }
    Ok(Outcome {
        verdict: if positive { "certified" } else { "inconclusive" },
        results,
        files: Vec::new(),
        audit: false,
    })
}

fn decisive_quantity(kind: ConditionKind, b: &thresholds::LevelBounds) -> Option<Enclosure> {
    match kind {
        ConditionKind::A1Positive => Some(b.a1),
        ConditionKind::A2Positive => b.a2,
        ConditionKind::RatioInUnitInterval => b.a2.filter(|_| b.a1.is_positive()).map(|a2| a2 / b.a1),
    }
}

fn write_plot(path: &Path, condition: Condition, mode: BoundMode, primes: impl Iterator<Item = u64>) -> Result<()> {
    let mut csv = String::from("prime,lo,hi\n");
    for p in primes {
        let b = thresholds::level_bounds(condition.family, mode, p)?;
        match decisive_quantity(condition.kind, &b) {
            Some(q) => writeln!(csv, "{p},{:e},{:e}", q.lo(), q.hi()),
            None => writeln!(csv, "{p},,"),
        }
        .expect("writing to a string");
    }
    std::fs::write(path, csv).map_err(|e| Error::io(path, e))
}

fn thresholds_cmd(a: &ThresholdsArgs) -> Result<Outcome> {
    let condition = Condition { kind: a.condition.into(), family: a.family.into() };
    let mode: BoundMode = a.mode.into();
    let start = a.min.unwrap_or(0);
    let report = thresholds::scan_range(condition, mode, start, a.max)?;
    let mut results = to_value(&report);
    if a.audit {
        let mut checked = BTreeMap::new();
        let boundary = [report.min_certified_prime, report.last_inconclusive, report.comparison.as_ref().map(|c| c.reference)];
        for p in boundary.into_iter().flatten() {
            if p < thresholds::regime_floor(condition.family, mode) || p > a.max {
                continue;
            }
            let fast = thresholds::certify_at(condition, mode, p)?;
            let exact = thresholds::certify_at_audit(condition, mode, p)?;
            checked.insert(p.to_string(), json!({ "binary64": fast, "dyadic320": exact, "agree": fast == exact }));
        }
        results["audit"] = Value::Object(checked.into_iter().collect());
    }
    if let Some(path) = &a.plot {
        write_plot(path, condition, mode, report.verdicts.keys().copied())?;
        results["plot"] = json!(path);
    }
    let audit_ok = results.get("audit").and_then(Value::as_object).is_none_or(|m| m.values().all(|v| v["agree"] == true));
    let reference_ok = report.comparison.as_ref().is_none_or(|c| c.certified_at_reference);
    let certified = report.min_certified_prime.is_some() && reference_ok && audit_ok;
    Ok(Outcome {
        verdict: if certified { "certified" } else { "inconclusive" },
        results,
        files: Vec::new(),
        audit: a.audit,
    })
}

fn certify_cmd(a: &CertifyArgs) -> Result<Outcome> {
    let records = data::load_newforms(&a.newforms)?;
    let files = vec![data::file_digest(&a.newforms)?];
    let plus_dim = match a.plus_dim {
        Some(d) => d,
        None => geometry::genus_x0plus(a.level).map_err(|_| {
            Error::Parameter(format!("level {} is not prime; pass --plus-dim", a.level))
        })?,
    };
    let v = lseries::level_verdict(a.level, &records, plus_dim, a.budget)?;
    let mut results = json!({ "level_verdict": to_value(&v) });
    let mut audit_ok = true;
    if a.audit {
        let mut audits = Vec::new();
        for cert in &v.certificates {
            let rec = records.iter().find(|r| r.label == cert.label).expect("certificate comes from a record");
            let exact = lseries::audit_certificate(rec, cert)?;
            audit_ok &= exact == cert.verdict;
            audits.push(json!({ "label": cert.label, "binary64": cert.verdict, "dyadic320": exact }));
        }
        results["audit"] = Value::Array(audits);
    }
    // Incomplete orbit coverage is reported inside the results and exits as inconclusive.
    let verdict = if v.verdict == Theorem2Verdict::Theorem2Holds && audit_ok { "certified" } else { "inconclusive" };
    Ok(Outcome { verdict, results, files, audit: a.audit })
}

fn lprime_cmd(a: &LprimeArgs) -> Result<Outcome> {
    let records = data::load_newforms(&a.newforms)?;
    let files = vec![data::file_digest(&a.newforms)?];
    let rec = records
        .iter()
        .find(|r| r.label == a.label)
        .ok_or_else(|| Error::InsufficientData(format!("no record labelled {}", a.label)))?;
    let budget = a.truncation.unwrap_or(rec.truncation());
    let cert = lseries::certify_nonvanishing(rec, budget)?;
    let mut results = json!({ "certificate": to_value(&cert), "fricke_sign": rec.fricke_sign,
        "quantity": if rec.fricke_sign == 1 { "L'(f,1)" } else { "L(f,1)" } });
    let mut ok = cert.verdict == NonvanishingVerdict::Nonzero;
    if a.audit {
        let exact = lseries::audit_certificate(rec, &cert)?;
        ok &= exact == cert.verdict;
        results["audit"] = json!({ "binary64": cert.verdict, "dyadic320": exact });
    }
    Ok(Outcome { verdict: if ok { "certified" } else { "inconclusive" }, results, files, audit: a.audit })
}

fn pointbound_cmd(a: &PointboundArgs) -> Result<Outcome> {
    let input = PointBoundInput { p: a.p, genus: a.genus, fp_count: a.fp, nv_product: a.nv };
    let bound = geometry::point_count_bound(&input)?;
    let kappa = geometry::kappa(a.p)?;
    Ok(Outcome {
        verdict: "success",
        results: json!({
            "input": to_value(&input),
            "kappa": to_value(&kappa),
            "genus_polynomial": geometry::genus_polynomial(a.genus),
            "max_rational_points": bound,
        }),
        files: Vec::new(),
        audit: false,
    })
}

fn genus_cmd(a: &GenusArgs) -> Result<Outcome> {
    let mut files = Vec::new();
    let (genus, formula) = match a.family {
        FamilyArg::X0plus => (
            geometry::genus_x0plus(a.level)?,
            "Riemann-Hurwitz for X0(N) -> X0+(N) with fixed points h(-4N) (+ h(-N) for N = 3 mod 4)",
        ),
        FamilyArg::Xnsplus => {
            let path = a.dimensions.clone().unwrap_or_else(|| data::bundled_data_dir().join("ns_dimensions.jsonl"));
            let dims = data::load_ns_dimensions(&path)?;
            files.push(data::file_digest(&path)?);
            (
                geometry::genus_xnsplus(a.level, &dims)?,
                "Chen: Jac(Xns+(N)) is isogenous to the new part of Jac(X0+(N^2)), so g = dim S_2(Γ0(N^2))^(+,new)",
            )
        }
    };
    Ok(Outcome {
        verdict: "success",
        results: json!({ "level": a.level, "genus": genus, "genus_at_least_2": genus >= 2, "formula": formula }),
        files,
        audit: false,
    })
}

fn screen_cmd(a: &ScreenArgs) -> Result<Outcome> {
    let curves = data::load_curves(&a.curves)?;
    let files = vec![data::file_digest(&a.curves)?];
    let mut rows = Vec::new();
    let mut all = true;
    for c in &curves {
        let n = c.conductor.isqrt();
        if n * n != c.conductor || !crate::arith::is_prime(n) || (!a.levels.is_empty() && !a.levels.contains(&n)) {
            continue;
        }
        let mode = bound_mode_for(Family::Xnsplus, n);
        let est = moments::moment_square_new_bound(1, n, mode)?;
        let lower = Enclosure::point(4.0 * std::f64::consts::PI) * est.normalized.lower();
        let e = lseries::single_curve_exclusion(c.conductor, c, lower)?;
        all &= e.verdict == ExclusionVerdict::Excluded;
        rows.push(json!({ "prime": n, "bound_mode": mode, "exclusion": to_value(&e) }));
    }
    for &n in &a.levels {
        if !rows.iter().any(|r| r["prime"] == n) {
            return Err(Error::InsufficientData(format!("no curve of conductor {} in {}", n * n, a.curves.display())));
        }
    }
    Ok(Outcome {
        verdict: if all && !rows.is_empty() { "certified" } else { "inconclusive" },
        results: json!({ "levels": rows }),
        files,
        audit: false,
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Moments(a) => moments_cmd(a),
        Command::Thresholds(a) => thresholds_cmd(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Lprime(a) => lprime_cmd(a),
        Command::Pointbound(a) => pointbound_cmd(a),
        Command::Genus(a) => genus_cmd(a),
        Command::Screen(a) => screen_cmd(a),
    }
}


/// Runs one command, writing the report to `stdout` (or `--out`) and
/// diagnostics to `stderr`. Returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_ERROR
                }
            };
        }
    };
    let t = Instant::now();
    let outcome = match cli.global.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Error::Parameter(e.to_string())),
        },
        None => execute(&cli),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let mut arithmetic = vec!["binary64 interval, directed rounding"];
    if outcome.audit {
        arithmetic.push("320-bit dyadic interval");
    }
    let report = Report {
        command: argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect(),
        version: env!("CARGO_PKG_VERSION"),
        arithmetic,
        inputs: Inputs { parameters: to_value(&cli.command), files: outcome.files.clone() },
        verdict: outcome.verdict,
        results: outcome.results.clone(),
        timing: Timing { runtime_ms: t.elapsed().as_millis() },
    };
    let text = serde_json::to_string_pretty(&report).expect("reports are serializable") + "\n";
    let written = match &cli.global.out {
        Some(p) => std::fs::write(p, &text).map_err(|e| Error::io(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_ERROR;
    }
    outcome.exit_code()
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
