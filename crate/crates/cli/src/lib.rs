//! The `ellcong` command line.
//!
//! [`run_cli`] does all the work and returns what `main` should print and
//! the exit code, so tests can drive it without spawning a process.
//!
//! Exit codes: 0 success, 1 success with violations (or a singular
//! specialization, or no admissible residue), 2 usage or input error,
//! 3 computation error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use ellcong_core::cache::{cache_read, cache_write, ApCache};
use ellcong_core::counting::{frobenius_scan, frobenius_scan_cached, DEFAULT_EXHAUSTIVE_THRESHOLD};
use ellcong_core::families::{family_corpus, family_for_divisor, parent_family, Specialization};
use ellcong_core::galois::{congruence_from_records, generate_subgroup, gl2_order, parse_generators, serre_condition};
use ellcong_core::survey::{
    cm_verdict_from_records, residue_histogram, survey_sets, CmThresholds, SurveyConfig,
    DEFAULT_EXCLUSION_THRESHOLD,
};
use ellcong_core::torsion::{torsion_group, TorsionConfig};
use ellcong_core::{
    CongruencePair, CurveQ, Error, FrobeniusRecord, PrimeRange, ReportDocument, ResidueClass, ResidueFilter,
    ScanConfig, SurveyMode,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Flags that change neither the result nor the echoed command.
const UNECHOED_FLAGS: [&str; 4] = ["--threads", "--cache", "--json", "--timing"];

#[derive(Parser, Debug)]
#[command(name = "ellcong", version, about = "Point-count congruences of elliptic curves over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report document as JSON to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// a_p cache file, read before and merged after the run.
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,

    /// Worker threads for prime scans.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,

    /// Also scan p = 2 and p = 3.
    #[arg(long, global = true)]
    include_small: bool,

    /// Count points by enumeration below this prime, baby-step giant-step above.
    #[arg(long, global = true, value_name = "P", default_value_t = DEFAULT_EXHAUSTIVE_THRESHOLD)]
    threshold: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point counts and traces of Frobenius up to a bound.
    Count(CountArgs),
    /// Check #E(F_p) = alpha (mod d) over good primes.
    Congruence(CongruenceArgs),
    /// Rational torsion subgroup.
    Torsion(CurveArg),
    /// Specialize the family with a point of order d.
    Family(FamilyArgs),
    /// Admissible alpha for the subgroup of GL(2, Z/dZ) spanned by generators.
    Serre(SerreArgs),
    /// Supersingular primes up to a bound.
    ScanSs(ScanSsArgs),
    /// Supersingular and ordinary congruence sweep over many curves.
    Survey(SurveyArgs),
    /// Supersingular density and the CM verdict it suggests.
    CmTest(CmArgs),
}

#[derive(Args, Debug)]
struct CurveArg {
    /// Curve y^2 = x^3 + Ax + B as "A,B".
    #[arg(long, allow_hyphen_values = true)]
    curve: CurveQ,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    curve: CurveArg,
    #[arg(long)]
    bound: u64,
    /// Smallest prime to scan.
    #[arg(long, default_value_t = 2)]
    from: u64,
    /// Only primes p = r (mod m); repeatable.
    #[arg(long = "primes-mod", value_name = "R,M")]
    primes_mod: Vec<ResidueClass>,
}

#[derive(Args, Debug)]
struct CongruenceArgs {
    #[command(flatten)]
    curve: CurveArg,
    #[arg(long, allow_negative_numbers = true)]
    d: i64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
    alpha: i64,
    #[arg(long)]
    bound: u64,
    #[arg(long = "primes-mod", value_name = "R,M")]
    primes_mod: Vec<ResidueClass>,
    #[arg(long, default_value = "all")]
    mode: SurveyMode,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, allow_negative_numbers = true)]
    d: i64,
    #[arg(long, allow_hyphen_values = true)]
    t: BigInt,
}

#[derive(Args, Debug)]
struct SerreArgs {
    #[arg(long)]
    d: u64,
    /// "m11,m12,m21,m22;..." or "m11,m12;m21,m22|...".
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    generators: String,
    /// Largest subgroup to enumerate.
    #[arg(long, default_value_t = ellcong_core::galois::DEFAULT_SUBGROUP_CAP)]
    cap: usize,
}

#[derive(Args, Debug)]
struct ScanSsArgs {
    #[command(flatten)]
    curve: CurveArg,
    #[arg(long)]
    bound: u64,
    /// Also tabulate the supersingular primes mod d.
    #[arg(long)]
    d: Option<u64>,
}

#[derive(Args, Debug)]
struct SurveyArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: i64,
    #[arg(long)]
    d_max: u64,
    #[arg(long)]
    bound: u64,
    /// Curve list, one "A,B" per line; '#' starts a comment. Without it the
    /// nonsingular family specializations with t in [t-min, t-max] are used.
    #[arg(long, value_name = "PATH")]
    curves: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -5)]
    t_min: i64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 5)]
    t_max: i64,
    /// Violations at p <= N do not count.
    #[arg(long, default_value_t = DEFAULT_EXCLUSION_THRESHOLD)]
    exclude_below: u64,
}

#[derive(Args, Debug)]
struct CmArgs {
    #[command(flatten)]
    curve: CurveArg,
    #[arg(long)]
    bound: u64,
    #[arg(long, default_value_t = 0.4)]
    cm_low: f64,
    #[arg(long, default_value_t = 0.6)]
    cm_high: f64,
    #[arg(long, default_value_t = 0.1)]
    non_cm_below: f64,
}

/// Everything a run produces.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<ReportDocument>,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn failure(err: &Error) -> Self {
        let code = if err.is_input_error() { EXIT_USAGE } else { EXIT_INTERNAL };
        Outcome { code, report: None, stdout: String::new(), stderr: format!("error: {err}\n") }
    }
}

struct Context {
    scan: ScanConfig,
    cache: Option<ApCache>,
}

impl Context {
    fn scan(&mut self, e: &CurveQ, range: PrimeRange) -> Result<Vec<FrobeniusRecord>, Error> {
        match self.cache.as_mut() {
            Some(c) => frobenius_scan_cached(e, range, &self.scan, c),
            None => frobenius_scan(e, range, &self.scan),
        }
    }
}

/// A command's report plus its exit code and an optional human summary line.
struct Run {
    report: ReportDocument,
    code: i32,
    summary: Option<String>,
}

pub fn run_cli<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, report: None, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, report: None, stdout: text, stderr: String::new() }
            };
        }
    };
    let echo = command_echo(&argv);
    let cache = match cli.cache.as_deref().map(cache_read).transpose() {
        Ok(c) => c,
        Err(e) => return Outcome::failure(&e),
    };
    let mut ctx = Context {
        scan: ScanConfig { exhaustive_threshold: cli.threshold, include_small: cli.include_small },
        cache,
    };

    let start = Instant::now();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| execute(&cli.command, &mut ctx)),
            Err(e) => Err(Error::InvalidArgument(format!("--threads {n}: {e}"))),
        },
        None => execute(&cli.command, &mut ctx),
    };
    let mut run = match result {
        Ok(run) => run,
        Err(e) => return Outcome::failure(&e),
    };
    run.report.command = echo;
    if cli.timing {
        run.report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }

    if let (Some(path), Some(cache)) = (&cli.cache, &ctx.cache) {
        if let Err(e) = cache_write(path, cache) {
            return Outcome::failure(&e);
        }
    }
    if let Some(path) = &cli.json {
        if let Err(e) = write_report(path, &run.report) {
            return Outcome::failure(&e);
        }
    }
    let mut stdout = run.summary.map(|s| s + "\n").unwrap_or_default();
    stdout.push_str(&run.report.to_table());
    Outcome { code: run.code, report: Some(run.report), stdout, stderr: String::new() }
}

fn write_report(path: &Path, report: &ReportDocument) -> Result<(), Error> {
    std::fs::write(path, report.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// argv without the program name and without flags that cannot change the result.
fn command_echo(argv: &[OsString]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut skip_value = false;
    for arg in argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()) {
        if std::mem::take(&mut skip_value) {
            continue;
        }
        let name = arg.split('=').next().unwrap_or_default();
        if UNECHOED_FLAGS.contains(&name) {
            skip_value = name != "--timing" && !arg.contains('=');
            continue;
        }
        out.push(arg);
    }
    out.join(" ")
}

fn value(v: impl Serialize) -> Result<serde_json::Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn execute(cmd: &Command, ctx: &mut Context) -> Result<Run, Error> {
    match cmd {
        Command::Count(a) => count(a, ctx),
        Command::Congruence(a) => congruence(a, ctx),
        Command::Torsion(a) => torsion(a),
        Command::Family(a) => family(a),
        Command::Serre(a) => serre(a),
        Command::ScanSs(a) => scan_ss(a, ctx),
        Command::Survey(a) => survey(a, ctx),
        Command::CmTest(a) => cm_test(a, ctx),
    }
}

fn count(a: &CountArgs, ctx: &mut Context) -> Result<Run, Error> {
    let curve = &a.curve.curve;
    let filter = ResidueFilter::new(a.primes_mod.clone());
    let records: Vec<FrobeniusRecord> = ctx
        .scan(curve, PrimeRange::new(a.from, a.bound))?
        .into_iter()
        .filter(|r| filter.admits(r.p()))
        .collect();
    let report = ReportDocument::new("count", json!({ "curve": curve.id(), "records": value(&records)? }))?
        .param("curve", curve.id())?
        .param("from", a.from)?
        .param("primes_mod", filter_strings(&filter))?
        .with_bound(a.bound);
    Ok(Run { report, code: EXIT_OK, summary: None })
}

fn filter_strings(f: &ResidueFilter) -> Vec<String> {
    f.classes().iter().map(ToString::to_string).collect()
}

fn congruence(a: &CongruenceArgs, ctx: &mut Context) -> Result<Run, Error> {
    if a.bound < 5 {
        return Err(Error::InvalidArgument(format!("--bound must be at least 5, got {}", a.bound)));
    }
    let curve = &a.curve.curve;
    let pair = CongruencePair::new(a.d, a.alpha)?;
    let filter = ResidueFilter::new(a.primes_mod.clone());
    let records: Vec<FrobeniusRecord> = ctx
        .scan(curve, PrimeRange::up_to(a.bound))?
        .into_iter()
        .filter(|r| !r.is_good() || a.mode.admits(r))
        .collect();
    let rep = congruence_from_records(curve, &records, pair, a.bound, &filter);
    let code = if rep.holds() { EXIT_OK } else { EXIT_VIOLATIONS };
    let summary = format!(
        "{}: {} good primes tested, {} violations of #E = {} (mod {})",
        rep.curve, rep.primes_tested, rep.violation_count, rep.alpha, rep.d
    );
    let report = ReportDocument::new("congruence", &rep)?
        .param("curve", curve.id())?
        .param("d", pair.d())?
        .param("alpha", pair.alpha())?
        .param("mode", a.mode)?
        .param("primes_mod", filter_strings(&filter))?
        .with_bound(a.bound)
        .with_violations(rep.violation_count);
    Ok(Run { report, code, summary: Some(summary) })
}

fn torsion(a: &CurveArg) -> Result<Run, Error> {
    let g = torsion_group(&a.curve, &TorsionConfig::default())?;
    let summary = format!("{}: torsion order {}", a.curve.id(), g.order);
    let report = ReportDocument::new("torsion", &g)?.param("curve", a.curve.id())?;
    Ok(Run { report, code: EXIT_OK, summary: Some(summary) })
}

fn family(a: &FamilyArgs) -> Result<Run, Error> {
    let parent = parent_family(a.d)?;
    let spec = family_for_divisor(a.d, &a.t)?;
    let (code, summary) = match &spec {
        Specialization::Nonsingular { curve } => (EXIT_OK, curve.id()),
        Specialization::Singular { .. } => {
            (EXIT_VIOLATIONS, format!("singular specialization: family d = {parent} at t = {}", a.t))
        }
    };
    let report = ReportDocument::new("family", json!({ "family": parent, "specialization": value(&spec)? }))?
        .param("d", a.d)?
        .param("t", a.t.to_string())?;
    Ok(Run { report, code, summary: Some(summary) })
}

fn serre(a: &SerreArgs) -> Result<Run, Error> {
    let gens = parse_generators(&a.generators, a.d)?;
    let group = generate_subgroup(&gens, a.d, a.cap)?;
    let admissible: Vec<u64> = serre_condition(&group).into_iter().collect();
    let code = if admissible.is_empty() { EXIT_VIOLATIONS } else { EXIT_OK };
    let summary = format!("subgroup of order {} mod {}: admissible alpha {:?}", group.order(), a.d, admissible);
    let result = json!({
        "group_order": group.order(),
        "gl2_order": gl2_order(a.d)?,
        "generators": gens.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "admissible": admissible,
    });
    let report = ReportDocument::new("serre", result)?.param("d", a.d)?.param("generators", &a.generators)?;
    Ok(Run { report, code, summary: Some(summary) })
}

fn scan_ss(a: &ScanSsArgs, ctx: &mut Context) -> Result<Run, Error> {
    let curve = &a.curve.curve;
    if let Some(d) = a.d {
        if d < 2 {
            return Err(Error::InvalidModulus(d as i64));
        }
    }
    let records = ctx.scan(curve, PrimeRange::up_to(a.bound))?;
    let primes: Vec<u64> =
        records.iter().filter(|r| r.is_supersingular() == Ok(true)).map(FrobeniusRecord::p).collect();
    let good = records.iter().filter(|r| r.is_good()).count();
    let summary = format!("{}: {} supersingular of {} good primes", curve.id(), primes.len(), good);
    let result = json!({
        "curve": curve.id(),
        "supersingular": primes.len(),
        "good_primes": good,
        "primes": &primes,
        "histogram": a.d.map(|d| residue_histogram(&primes, d)),
    });
    let report = ReportDocument::new("scan-ss", result)?
        .param("curve", curve.id())?
        .param("d", a.d)?
        .with_bound(a.bound);
    Ok(Run { report, code: EXIT_OK, summary: Some(summary) })
}

/// One curve per non-blank line; '#' starts a comment.
pub fn parse_curve_list(text: &str) -> Result<Vec<CurveQ>, Error> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or_default().trim();
        if body.is_empty() {
            continue;
        }
        out.push(body.parse().map_err(|e: Error| Error::Parse { line: i + 1, reason: e.to_string() })?);
    }
    Ok(out)
}

fn survey(a: &SurveyArgs, ctx: &mut Context) -> Result<Run, Error> {
    let (curves, source) = match &a.curves {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            (parse_curve_list(&text)?, path.display().to_string())
        }
        None => {
            if a.t_min > a.t_max {
                return Err(Error::InvalidArgument(format!("--t-min {} exceeds --t-max {}", a.t_min, a.t_max)));
            }
            let corpus = family_corpus(a.t_min, a.t_max)?;
            (corpus.into_iter().map(|(_, _, c)| c).collect(), format!("families t in [{}, {}]", a.t_min, a.t_max))
        }
    };
    let cfg = SurveyConfig { scan: ctx.scan, exclusion_threshold: a.exclude_below, ..SurveyConfig::default() };
    let rep = survey_sets(a.alpha, a.d_max, &curves, a.bound, &cfg, ctx.cache.as_mut())?;
    let violations = rep.violation_count();
    let code = if !rep.failures.is_empty() {
        EXIT_INTERNAL
    } else if violations > 0 {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    };
    let summary = format!(
        "alpha = {}: supersingular candidates {:?}, ordinary candidates {:?} ({} {})",
        rep.alpha, rep.s_candidates, rep.o_candidates, rep.label, rep.bound
    );
    let report = ReportDocument::new("survey", &rep)?
        .param("alpha", a.alpha)?
        .param("d_max", a.d_max)?
        .param("curves", source)?
        .param("exclude_below", a.exclude_below)?
        .with_bound(a.bound)
        .with_violations(violations);
    Ok(Run { report, code, summary: Some(summary) })
}

fn cm_test(a: &CmArgs, ctx: &mut Context) -> Result<Run, Error> {
    let curve = &a.curve.curve;
    let th = CmThresholds { cm_low: a.cm_low, cm_high: a.cm_high, non_cm_below: a.non_cm_below };
    let records = ctx.scan(curve, PrimeRange::up_to(a.bound))?;
    let v = cm_verdict_from_records(&records, &th);
    let summary = format!("{}: density {:.4} ({:?})", curve.id(), v.density, v.verdict);
    let report = ReportDocument::new("cm-test", json!({ "curve": curve.id(), "verdict": value(v)? }))?
        .param("curve", curve.id())?
        .param("cm_low", a.cm_low)?
        .param("cm_high", a.cm_high)?
        .param("non_cm_below", a.non_cm_below)?
        .with_bound(a.bound);
    Ok(Run { report, code: EXIT_OK, summary: Some(summary) })
}
