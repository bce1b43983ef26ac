use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use orthoint::exactnum::format_rational;
use orthoint::integrals::{
    compressed_expansion, elementary_expansion, expansion_trace, i_from_j, j_value_routed, normalization_factor,
    Method, Route,
};
use orthoint::normalization::{phi_property_battery, BatteryReport, ExponentSolution, ExponentSystem, GridSpec};
use orthoint::spheremodel::{haar_moments, law_compare, law_exact, model_battery, LawReport, ModelBattery};
use orthoint::verify::{self, Suite, VerifyConfig};
use orthoint::{weingarten, Error, ExponentMatrix};

#[derive(Parser)]
#[command(name = "orthoint", version, about = "Exact polynomial integrals over the orthogonal group")]
struct Cli {
    /// Worker threads for parallel grids (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Build every Weingarten table from scratch.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Number of Weingarten tables kept in memory.
    #[arg(long, global = true)]
    cache_capacity: Option<usize>,
    /// Directory for persisted tables (also read from ORTHOINT_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the integral of a monomial in the entries of a Haar orthogonal matrix.
    Integral(IntegralArgs),
    /// Print the Weingarten matrix W_{kn} as CSV.
    WeingartenTable {
        #[arg(short, long)]
        k: usize,
        #[arg(short, long)]
        n: u64,
    },
    /// List the terms of the elementary (or compressed) expansion as JSON lines.
    Expand {
        #[arg(short, long)]
        matrix: String,
        #[arg(long)]
        compressed: bool,
    },
    /// Run the normalization property battery and solve the exponent systems.
    CheckNormalization {
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, default_value_t = 4)]
        max_entry: u64,
        #[arg(long, default_value = "3..10", value_parser = parse_range)]
        n: RangeInclusive<u64>,
    },
    /// Tabulate the scaled diagonal three-row moments as CSV.
    CheckConjecture {
        #[arg(long, default_value_t = 8)]
        max: u64,
        #[arg(long, default_value = "3..8", value_parser = parse_range)]
        n: RangeInclusive<u64>,
    },
    /// Compare the sphere model with exact and sampled laws.
    ModelCompare {
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        max_degree: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
    },
    /// Estimate a monomial moment from Haar samples.
    HaarSample {
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(short, long)]
        monomial: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sample from SO_n instead of O_n.
        #[arg(long)]
        special: bool,
    },
    /// Run verification suites; exits nonzero when an exact check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IntegralArgs {
    /// Rows separated by ':' and entries by ',' (e.g. 4,0:0,0), a JSON array, or a JSON file.
    #[arg(short, long)]
    matrix: String,
    #[arg(short, long, required_unless_present = "n_range")]
    n: Option<u64>,
    /// Print J instead of I.
    #[arg(long)]
    normalized: bool,
    #[arg(long, default_value = "auto")]
    method: Method,
    /// Print "n,value" CSV over an inclusive range such as 3..10.
    #[arg(long, value_parser = parse_range, conflicts_with = "n")]
    n_range: Option<RangeInclusive<u64>>,
    /// Print the evaluated compressed expansion as JSON lines before the value.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (repeatable); all by default.
    #[arg(long)]
    suite: Vec<Suite>,
    #[arg(long)]
    max_sum: Option<u64>,
    #[arg(long)]
    max_entry: Option<u64>,
    #[arg(long)]
    max_q: Option<usize>,
    #[arg(long, value_parser = parse_range)]
    n: Option<RangeInclusive<u64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, alias = "max")]
    conjecture_max: Option<u64>,
    #[arg(long)]
    model_degree: Option<u64>,
    /// Emit the full reports as JSON instead of one line per check.
    #[arg(long)]
    json: bool,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let bad = || format!("expected N or A..B, got {s:?}");
    match s.split_once("..") {
        None => s.trim().parse().map(|n| n..=n).map_err(|_| bad()),
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
    }
}

fn parse_matrix(s: &str) -> orthoint::Result<ExponentMatrix> {
    let t = s.trim();
    let text = if t.starts_with('[') || t.contains(',') || t.contains(':') || t.chars().all(|c| c.is_ascii_digit()) {
        t.to_string()
    } else {
        std::fs::read_to_string(t).map_err(|e| Error::Parse(format!("cannot read {t}: {e}")))?
    };
    let text = text.trim();
    if text.starts_with('[') {
        let rows: Vec<Vec<u64>> =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad JSON matrix: {e}")))?;
        ExponentMatrix::from_rows(rows)
    } else {
        text.parse()
    }
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::OddLength(_) | Error::SizeMismatch(_) => 2,
            Error::GramSingular { .. } => 3,
            _ => 1,
        };
        let mut message = e.to_string();
        if code == 3 {
            message.push_str(
                "\nhint: the Gram matrix is singular for n below half the degree; \
                 use --method auto or two-row, which use closed forms for one-row, \
                 n = 2, cross, spark, two-row and three-row shapes",
            );
        }
        Failure { code, message }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

type CliResult = Result<u8, Failure>;

fn json_line<T: Serialize>(out: &mut impl Write, v: &T) -> CliResult {
    serde_json::to_writer(&mut *out, v)?;
    writeln!(out)?;
    Ok(0)
}

fn json_pretty<T: Serialize>(out: &mut impl Write, v: &T) -> CliResult {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(0)
}

fn integral(args: &IntegralArgs, out: &mut impl Write) -> CliResult {
    let a = parse_matrix(&args.matrix)?;
    let ns = match (&args.n_range, args.n) {
        (Some(r), _) => r.clone(),
        (None, Some(n)) => n..=n,
        (None, None) => unreachable!("clap requires one of n or n-range"),
    };
    let csv = args.n_range.is_some();
    if csv {
        writeln!(out, "n,value")?;
    }
    for n in ns {
        if args.trace {
            for t in expansion_trace(&a, n)? {
                json_line(out, &t)?;
            }
        }
        let (j, route) = j_value_routed(&a, n, args.method)?;
        let value = if args.normalized { j.clone() } else { i_from_j(&a, n, &j) };
        if route != Route::NotAdmissible && is_zero(&j) {
            eprintln!("note: {a} is admissible but its integral vanishes at n={n}");
        }
        if csv {
            writeln!(out, "{n},{}", format_rational(&value))?;
        } else {
            writeln!(out, "{}", format_rational(&value))?;
        }
    }
    Ok(0)
}

fn is_zero(r: &orthoint::Rational) -> bool {
    *r.numer() == 0.into()
}

fn weingarten_table(k: usize, n: u64, out: &mut impl Write) -> CliResult {
    let t = weingarten::table(k, n)?;
    let full = t.full()?;
    let labels: Vec<String> = t.pairings().iter().map(|p| format!("\"{p}\"")).collect();
    writeln!(out, "\"pi\\sigma\",{}", labels.join(","))?;
    for (label, row) in labels.iter().zip(&full) {
        let vals: Vec<String> = row.iter().map(format_rational).collect();
        writeln!(out, "{label},{}", vals.join(","))?;
    }
    Ok(0)
}

fn expand(matrix: &str, compressed: bool, out: &mut impl Write) -> CliResult {
    let a = parse_matrix(matrix)?;
    if compressed {
        for t in compressed_expansion(&a)? {
            json_line(out, &t)?;
        }
    } else {
        for t in elementary_expansion(&a)? {
            json_line(out, &t)?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct NormalizationOutput {
    battery: BatteryReport,
    exponent_systems: Vec<ExponentSolution>,
}

fn check_normalization(q: usize, max_entry: u64, n: RangeInclusive<u64>, out: &mut impl Write) -> CliResult {
    let grid = GridSpec {
        max_q: q,
        max_entry,
        n_min: *n.start(),
        n_max: *n.end(),
        ..GridSpec::default()
    };
    let battery = phi_property_battery(&grid)?;
    let exponent_systems = (2..=q.clamp(2, 4))
        .map(|q| ExponentSystem::build(q)?.solve())
        .collect::<orthoint::Result<Vec<_>>>()?;
    let pass = battery.pass;
    json_pretty(out, &NormalizationOutput { battery, exponent_systems })?;
    Ok(if pass { 0 } else { 1 })
}

fn check_conjecture(max: u64, n: RangeInclusive<u64>, out: &mut impl Write) -> CliResult {
    writeln!(out, "a,b,c,n,value,is_integer")?;
    for r in verify::conjecture_rows(max, *n.start(), *n.end())? {
        writeln!(out, "{},{},{},{},{},{}", r.a, r.b, r.c, r.n, format_rational(&r.value), r.is_integer)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct ModelOutput {
    n: usize,
    battery: Option<ModelBattery>,
    exact_law_failures: Vec<(u32, u32)>,
    monte_carlo: LawReport,
    pass: bool,
}

fn model_compare(n: usize, max_degree: u64, seed: u64, count: usize, out: &mut impl Write) -> CliResult {
    let battery = if n <= 2 { Some(model_battery(n, max_degree)?) } else { None };
    let exact_law_failures = law_exact(n, max_degree as u32)?;
    let monte_carlo = law_compare(n, count, seed, max_degree as u32)?;
    let pass = battery.as_ref().is_none_or(|b| b.pass) && exact_law_failures.is_empty() && monte_carlo.pass;
    let exact_ok = battery.as_ref().is_none_or(|b| b.pass) && exact_law_failures.is_empty();
    json_pretty(out, &ModelOutput { n, battery, exact_law_failures, monte_carlo, pass })?;
    Ok(if exact_ok { 0 } else { 1 })
}

fn haar_sample(n: usize, count: usize, monomial: &str, seed: u64, special: bool, out: &mut impl Write) -> CliResult {
    let a = parse_matrix(monomial)?;
    let est = haar_moments(n, std::slice::from_ref(&a), count, seed, special)?[0];
    writeln!(out, "{:.8} ± {:.8}", est.mean, est.stderr)?;
    if !special {
        if let Ok((j, _)) = j_value_routed(&a, n as u64, Method::Auto) {
            let exact = &j * normalization_factor(&a, n as u64);
            writeln!(out, "exact {} (z = {:.3})", format_rational(&exact), est.z(orthoint::spheremodel::so3::to_f64(&exact)))?;
        }
    }
    Ok(0)
}

fn run_verify(args: &VerifyArgs, out: &mut impl Write) -> CliResult {
    let mut cfg = VerifyConfig::default();
    if let Some(v) = args.max_sum {
        cfg.max_sum = v;
    }
    if let Some(v) = args.max_entry {
        cfg.max_entry = v;
    }
    if let Some(v) = args.max_q {
        cfg.max_q = v;
    }
    if let Some(r) = &args.n {
        cfg.n_min = *r.start();
        cfg.n_max = *r.end();
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.count {
        cfg.count = v;
    }
    if let Some(v) = args.conjecture_max {
        cfg.conjecture_max = v;
    }
    if let Some(v) = args.model_degree {
        cfg.model_degree = v;
    }
    let suites: Vec<Suite> = if args.suite.is_empty() { Suite::ALL.to_vec() } else { args.suite.clone() };
    let mut reports = Vec::new();
    for s in suites {
        let r = verify::run_suite(s, &cfg)?;
        if !args.json {
            for c in &r.checks {
                let verdict = match (c.pass, c.report_only) {
                    (_, true) => "INFO",
                    (true, false) => "PASS",
                    (false, false) => "FAIL",
                };
                writeln!(
                    out,
                    "{verdict} {}/{} checked={} skipped={} failures={}",
                    r.suite, c.name, c.checked, c.skipped, c.failures
                )?;
                if !c.pass {
                    for d in &c.details {
                        writeln!(out, "    {d}")?;
                    }
                }
            }
        }
        reports.push(r);
    }
    if args.json {
        json_pretty(out, &reports)?;
    }
    Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn run(cli: Cli) -> CliResult {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Failure { code: 1, message: e.to_string() })?;
    }
    if cli.no_cache {
        weingarten::set_cache_enabled(false);
    }
    if let Some(c) = cli.cache_capacity {
        weingarten::set_cache_capacity(c);
    }
    if let Some(d) = cli.cache_dir {
        weingarten::set_persist_dir(Some(d));
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = match &cli.command {
        Command::Integral(args) => integral(args, &mut out)?,
        Command::WeingartenTable { k, n } => weingarten_table(*k, *n, &mut out)?,
        Command::Expand { matrix, compressed } => expand(matrix, *compressed, &mut out)?,
        Command::CheckNormalization { q, max_entry, n } => check_normalization(*q, *max_entry, n.clone(), &mut out)?,
        Command::CheckConjecture { max, n } => check_conjecture(*max, n.clone(), &mut out)?,
        Command::ModelCompare { n, max_degree, seed, count } => model_compare(*n, *max_degree, *seed, *count, &mut out)?,
        Command::HaarSample { n, count, monomial, seed, special } => {
            haar_sample(*n, *count, monomial, *seed, *special, &mut out)?
        }
        Command::Verify(args) => run_verify(args, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
