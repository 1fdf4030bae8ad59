//! The `unitfrac` command line.
//!
//! Every command writes a stream of flat records, rendered as JSON lines,
//! CSV, or `key=value` text. Exit codes: 0 success, 2 usage or parse error,
//! 3 a resource cap was reached, 4 a checked statement was violated.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::arith::{delta, mu, nu, sigma, FinSet, Nat};
use crate::coprime::{
    check_nu_lower_bound, first_primes_nu, nu_digit_histogram, prime_hunter, verify_coprime_injectivity, CoprimeGround,
};
use crate::error::{Error, Result};
use crate::factor::FactorBudget;
use crate::family::{assemble_family, IndexStrategy, RationalTarget};
use crate::scan::{
    run_scan, scan_from_checkpoint, Checkpoint, ErdosNivenParams, ErdosNivenScan, NonintegralityParams,
    NonintegralityScan, NuCollisionParams, NuCollisionScan, QuadrupleParams, QuadrupleScan, Scan, TkParams, TkScan,
};
use crate::sequence::{disjoint_subsequence, run as run_sequence, SeqState};
use crate::stars::{exponent_profile, pb_membership, ProfileRecord, StarProfile};
use crate::sylvester::{interval_sylvester_powers, valuation, verify_delta_divisibility, Interval, SylvesterPower};
use crate::words::{check_length_uniqueness, level_multiset, preimages, LevelCaps, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Parser)]
#[command(
    name = "unitfrac",
    version,
    about = "Exact computations with finite sets of unit fractions"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Write records to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel scans (0 = one per core). Output does not
    /// depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Largest level index W_k b that may be materialized.
    #[arg(long, global = true, default_value_t = 20)]
    pub max_k: u32,
    /// Largest decimal digit count for any single value.
    #[arg(long, global = true, default_value_t = 20_000)]
    pub digit_cap: usize,
    /// Pollard rho iterations allowed per factorization.
    #[arg(long, global = true, default_value_t = 20_000_000)]
    pub budget: u64,
    /// Largest number of subsets any enumeration may visit.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub subset_cap: u64,
    /// Largest number of σ-sequence terms a trace may hold.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub step_cap: u64,
}

/// Caps and output settings shared by all commands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub levels: LevelCaps,
    pub factoring: FactorBudget,
    pub subset_cap: u64,
    pub step_cap: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: Format::Plain,
            out: None,
            workers: 0,
            levels: LevelCaps::default(),
            factoring: FactorBudget::default(),
            subset_cap: 1 << 20,
            step_cap: 100_000,
        }
    }
}

impl RunConfig {
    fn from_args(a: &ConfigArgs) -> Result<Self> {
        if a.max_k == 0 || a.digit_cap == 0 || a.budget == 0 || a.subset_cap == 0 || a.step_cap == 0 {
            return Err(Error::parse("caps must be positive"));
        }
        Ok(RunConfig {
            format: a.format,
            out: a.out.clone(),
            workers: a.workers,
            levels: LevelCaps {
                max_k: a.max_k,
                digit_cap: a.digit_cap,
            },
            factoring: FactorBudget {
                rho_iterations: a.budget,
                ..FactorBudget::default()
            },
            subset_cap: a.subset_cap,
            step_cap: a.step_cap,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// σ, ν, δ and μ of a set "{a,b,c}" or interval "m..n".
    Sigma { set: String },
    /// Pairwise disjoint sets each summing to a/b.
    Decompose {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Greedy)]
        strategy: StrategyArg,
    },
    /// Words over ◇ (d) and ★ (s).
    #[command(subcommand)]
    Words(WordsCommand),
    /// Terms of the σ-sequence from a seed set.
    Seq {
        seed: String,
        /// Number of terms A_1..A_N to print (A_1 is the seed; 0 prints the seed).
        #[arg(default_value_t = 6)]
        terms: u64,
        /// Instead of a trace, print the greedy pairwise disjoint subsequence
        /// of A_1..A_H.
        #[arg(long)]
        disjoint: Option<u64>,
    },
    /// Sylvester powers of a set and their exponents in δ.
    Sylvester {
        set: String,
        /// For an interval, compute from per-prime valuations instead of factoring.
        #[arg(long)]
        interval_route: bool,
    },
    /// Resumable exhaustive scans.
    Scan(ScanArgs),
    /// Pairwise coprime ground sets and the numerator ν.
    #[command(subcommand)]
    Coprime(CoprimeCommand),
    /// Prime exponents along ★^j b.
    Stars {
        b: String,
        depth: u32,
        /// Extend a profile saved as JSON lines (from `--format json`).
        #[arg(long)]
        from: Option<PathBuf>,
        /// Also report which primes up to this bound divide some iterate.
        #[arg(long)]
        pb_bound: Option<u64>,
    },
    /// Run the built-in checks and report one line per check.
    Verify {
        /// Small bounds, for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Checks to run (default: all).
        checks: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    Recursive,
}

#[derive(Debug, Subcommand)]
pub enum WordsCommand {
    /// Apply a word such as "dssddd" to n.
    Apply { word: String, n: String },
    /// The level W_k b.
    Level {
        k: u32,
        b: String,
        /// Print every value.
        #[arg(long)]
        values: bool,
    },
    /// All words w with w b = n, longest first.
    Preimages { b: u64, n: u64 },
    /// Check distinct word lengths for every n up to n_max.
    Lengths { b: u64, n_max: u64 },
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Resume from a checkpoint token printed by an earlier run.
    #[arg(long, global = true)]
    pub resume: Option<String>,
    #[command(subcommand)]
    pub kind: Option<ScanKind>,
}

#[derive(Debug, Subcommand)]
pub enum ScanKind {
    /// Equal sylvester-power sets on disjoint intervals.
    Quadruple {
        bound: u64,
        #[arg(long, default_value_t = 16)]
        chunk: u64,
    },
    /// Collisions among σ of intervals inside [1, n].
    ErdosNiven {
        n: u64,
        #[arg(long, default_value_t = 16)]
        chunk: u64,
    },
    /// Integral σ over intervals [m, n].
    Tk {
        n_max: u64,
        #[arg(long)]
        m_max: Option<u64>,
        #[arg(long, default_value_t = 64)]
        chunk: u64,
    },
    /// Equal ν among subsets of a pool.
    NuCollision {
        pool: String,
        size: usize,
        #[arg(long, default_value_t = 64)]
        chunk: u64,
    },
    /// Non-integral progression and weighted sums.
    Nonintegrality {
        #[arg(long, default_value = "2..50")]
        m: String,
        #[arg(long, default_value = "1..50")]
        d: String,
        #[arg(long, default_value = "1..50")]
        k: String,
        #[arg(long, default_value_t = 200)]
        powered: usize,
        #[arg(long, default_value_t = 200)]
        weighted: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = 1024)]
        chunk: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoprimeCommand {
    /// Injectivity of δ and σ over all nonempty subsets.
    Check { set: String },
    /// ν{q_1^e_1, …} and its factorization.
    Hunter {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<u32>,
    },
    /// ν over the first k primes, k = 1..=K.
    FirstPrimes { k: usize },
    /// νC against |C|·∏C / (max C)^|C|.
    LowerBound { set: String },
    /// Digit counts of ν over all nonempty subsets.
    Histogram { set: String },
}

/// Parses "{a,b,c}" or "m..n".
pub fn parse_set(text: &str) -> Result<FinSet> {
    let t = text.trim();
    if let Some((m, n)) = t.split_once("..") {
        let m: u64 = m
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad interval start in {t:?}")))?;
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad interval end in {t:?}")))?;
        return FinSet::interval(m, n).map_err(|e| Error::parse(e.to_string()));
    }
    let s: FinSet = t.parse()?;
    if s.is_empty() {
        return Err(Error::parse("the set is empty"));
    }
    Ok(s)
}

fn parse_range(text: &str) -> Result<(u64, u64)> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| Error::parse(format!("expected a range m..n, got {text:?}")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| Error::parse(format!("bad range {text:?}")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| Error::parse(format!("bad range {text:?}")))?;
    if a > b {
        return Err(Error::parse(format!("empty range {text:?}")));
    }
    Ok((a, b))
}

fn parse_big(text: &str) -> Result<Nat> {
    crate::arith::parse_nat(text.trim())
}

/// Renders records in the chosen format.
struct Sink<'a> {
    format: Format,
    w: Box<dyn Write + Send + 'a>,
    header: Option<Vec<String>>,
    violations: u64,
}

impl<'a> Sink<'a> {
    fn emit(&mut self, rec: &Value) -> io::Result<()> {
        if rec.get("status").and_then(Value::as_str) == Some("violation") {
            self.violations += 1;
        }
        let obj = rec.as_object().expect("records are objects");
        match self.format {
            Format::Json => {
                serde_json::to_writer(&mut self.w, rec)?;
                writeln!(self.w)
            }
            Format::Plain => {
                let line: Vec<String> = obj.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
                writeln!(self.w, "{}", line.join(" "))
            }
            Format::Csv => {
                let keys: Vec<String> = obj.keys().cloned().collect();
                let mut csv = csv::WriterBuilder::new().from_writer(Vec::new());
                // A record with a different shape starts a new header row.
                if self.header.as_ref() != Some(&keys) {
                    csv.write_record(&keys)?;
                    self.header = Some(keys);
                }
                csv.write_record(obj.values().map(csv_cell))?;
                let bytes = csv.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
                self.w.write_all(&bytes)
            }
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Arrays of decimal strings print as sets; other nesting prints as JSON.
fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|x| x.as_str().is_some_and(is_decimal)) => {
            let inner: Vec<&str> = items.iter().map(|x| x.as_str().expect("checked")).collect();
            format!("{{{}}}", inner.join(","))
        }
        other => other.to_string(),
    }
}

fn is_decimal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn record(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse(_) => EXIT_USAGE,
        Error::Resource { .. } | Error::TraceCap { .. } => EXIT_RESOURCE,
    }
}

/// Runs the CLI on `args` (including the program name), writing records to
/// `stdout` (unless `--out` is given) and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    let config = match RunConfig::from_args(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let file;
    let w: Box<dyn Write + Send + '_> = match &config.out {
        Some(path) => match File::create(path) {
            Ok(f) => {
                file = f;
                Box::new(BufWriter::new(&file))
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot create {}: {e}", path.display());
                return EXIT_IO;
            }
        },
        None => Box::new(stdout),
    };
    let mut sink = Sink {
        format: config.format,
        w,
        header: None,
        violations: 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(config.workers).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start workers: {e}");
            return EXIT_IO;
        }
    };
    let outcome = pool.install(|| dispatch(&cli.command, &config, &pool, &mut sink, stderr));
    let flushed = sink.w.flush();
    match outcome {
        Ok(()) => match flushed {
            Ok(()) if sink.violations > 0 => EXIT_VIOLATION,
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_IO
            }
        },
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_IO
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

enum Failure {
    Io(io::Error),
    Lib(Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn dispatch(
    cmd: &Command,
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
    sink: &mut Sink<'_>,
    stderr: &mut (dyn Write + Send),
) -> Outcome {
    match cmd {
        Command::Sigma { set } => cmd_sigma(&parse_set(set)?, sink),
        Command::Decompose { a, b, count, strategy } => cmd_decompose(*a, *b, *count, *strategy, cfg, sink, stderr),
        Command::Words(w) => cmd_words(w, cfg, sink),
        Command::Seq { seed, terms, disjoint } => cmd_seq(&parse_set(seed)?, *terms, *disjoint, cfg, sink, stderr),
        Command::Sylvester { set, interval_route } => cmd_sylvester(set, *interval_route, cfg, sink),
        Command::Scan(args) => cmd_scan(args, cfg, pool, sink),
        Command::Coprime(c) => cmd_coprime(c, cfg, sink),
        Command::Stars {
            b,
            depth,
            from,
            pb_bound,
        } => cmd_stars(&parse_big(b)?, *depth, from.as_ref(), *pb_bound, cfg, sink, stderr),
        Command::Verify { quick, checks } => cmd_verify(*quick, checks, cfg, sink),
    }
}

fn cmd_sigma(x: &FinSet, sink: &mut Sink<'_>) -> Outcome {
    sink.emit(&record(vec![
        ("set", json!(x)),
        ("sigma", json!(sigma(x)?.to_string())),
        ("nu", json!(nu(x)?.to_string())),
        ("delta", json!(delta(x)?.to_string())),
        ("mu", json!(mu(x)?.to_string())),
    ]))?;
    Ok(())
}

fn cmd_decompose(
    a: u64,
    b: u64,
    count: usize,
    strategy: StrategyArg,
    cfg: &RunConfig,
    sink: &mut Sink<'_>,
    stderr: &mut (dyn Write + Send),
) -> Outcome {
    let target = RationalTarget::new(a, b)?;
    let strategy = match strategy {
        StrategyArg::Greedy => IndexStrategy::Greedy,
        StrategyArg::Recursive => IndexStrategy::Recursive,
    };
    let family = match assemble_family(&target, count, cfg.levels.max_k, strategy, &cfg.levels) {
        Ok(f) => f,
        Err(Error::Resource { achieved, .. }) => {
            sink.emit(&record(vec![
                ("status", json!("truncated")),
                ("requested", json!(count)),
                ("achieved", json!(achieved)),
                ("max_k", json!(cfg.levels.max_k)),
            ]))?;
            writeln!(
                stderr,
                "only {achieved} of {count} disjoint sets fit within max level {}",
                cfg.levels.max_k
            )?;
            return Err(Failure::Lib(Error::resource("family block", count as u64, achieved)));
        }
        Err(e) => return Err(e.into()),
    };
    for r in family.records() {
        sink.emit(&serde_json::to_value(&r).expect("serializes"))?;
    }
    let verified = family.verify();
    sink.emit(&record(vec![
        ("status", json!(if verified { "ok" } else { "violation" })),
        ("blocks", json!(family.blocks.len())),
        ("sigma_each", json!(target.value().to_string())),
        ("pairwise_disjoint_and_exact", json!(verified)),
    ]))?;
    Ok(())
}

fn cmd_words(cmd: &WordsCommand, cfg: &RunConfig, sink: &mut Sink<'_>) -> Outcome {
    match cmd {
        WordsCommand::Apply { word, n } => {
            let w: Word = word.parse()?;
            let n = parse_big(n)?;
            let value = w.apply(&n)?;
            sink.emit(&record(vec![
                ("word", json!(w.to_string())),
                ("length", json!(w.len())),
                ("n", json!(n.to_string())),
                ("value", json!(value.to_string())),
            ]))?;
        }
        WordsCommand::Level { k, b, values } => {
            let lvl = level_multiset(*k, &parse_big(b)?, &cfg.levels)?;
            let set_sigma = lvl.to_finset().and_then(|s| sigma(&s)).map(|s| s.to_string());
            let mut rec = vec![
                ("k", json!(k)),
                ("b", json!(lvl.base.to_string())),
                ("words", json!(lvl.total_multiplicity())),
                ("distinct", json!(lvl.distinct_len())),
                ("simple", json!(lvl.is_simple())),
                ("sigma", json!(set_sigma.unwrap_or_else(|_| "n/a".into()))),
                ("min", json!(lvl.min().to_string())),
                ("max", json!(lvl.max().to_string())),
            ];
            if *values {
                rec.push((
                    "values",
                    json!(lvl.values.iter().map(|(v, _)| v.to_string()).collect::<Vec<_>>()),
                ));
            }
            sink.emit(&record(rec))?;
        }
        WordsCommand::Preimages { b, n } => {
            for w in preimages(*b, *n)? {
                sink.emit(&record(vec![
                    ("b", json!(b.to_string())),
                    ("n", json!(n.to_string())),
                    ("word", json!(w.to_string())),
                    ("length", json!(w.len())),
                ]))?;
            }
        }
        WordsCommand::Lengths { b, n_max } => {
            let r = check_length_uniqueness(*b, *n_max)?;
            for v in &r.violations {
                sink.emit(&record(vec![
                    ("status", json!("violation")),
                    ("n", json!(v.n.to_string())),
                    ("reason", json!(v.reason)),
                ]))?;
            }
            sink.emit(&record(vec![
                ("status", json!(if r.holds() { "ok" } else { "violation" })),
                ("b", json!(b)),
                ("n_max", json!(n_max)),
                ("targets", json!(r.targets_checked)),
                ("words", json!(r.words_checked)),
                ("violations", json!(r.violations.len())),
            ]))?;
        }
    }
    Ok(())
}

fn state_record(s: &SeqState) -> Value {
    record(vec![
        ("index", json!(s.index)),
        ("elements", json!(s.set)),
        ("min", json!(s.min.to_string())),
        ("replaced", json!(s.replaced.to_string())),
        ("doomed", json!(s.doomed)),
    ])
}

fn cmd_seq(
    seed: &FinSet,
    terms: u64,
    disjoint: Option<u64>,
    cfg: &RunConfig,
    sink: &mut Sink<'_>,
    stderr: &mut (dyn Write + Send),
) -> Outcome {
    if let Some(h) = disjoint {
        if h > cfg.step_cap {
            return Err(Error::resource("sequence steps", cfg.step_cap, 0).into());
        }
        let d = disjoint_subsequence(seed, h)?;
        sink.emit(&record(vec![
            ("horizon", json!(h)),
            ("indices", json!(d.indices)),
            (
                "secure_bounds",
                json!(d.secure_bounds.iter().map(ToString::to_string).collect::<Vec<_>>()),
            ),
        ]))?;
        return Ok(());
    }
    let trace = match run_sequence(seed, terms, cfg.step_cap) {
        Ok(t) => t,
        Err(Error::TraceCap { cap, partial }) => {
            for s in &partial.states {
                sink.emit(&state_record(s))?;
            }
            writeln!(stderr, "stopped at the step cap of {cap} terms")?;
            return Err(Failure::Lib(Error::resource(
                "sequence steps",
                cap,
                partial.states.len() as u64,
            )));
        }
        Err(e) => return Err(e.into()),
    };
    for s in &trace.states {
        sink.emit(&state_record(s))?;
    }
    let firsts: Map<String, Value> = trace
        .first_min_index
        .iter()
        .map(|(m, i)| (m.to_string(), json!(i)))
        .collect();
    sink.emit(&record(vec![
        ("sigma", json!(trace.sigma.to_string())),
        ("terms", json!(trace.states.len())),
        ("doomed", json!(trace.doomed.len())),
        ("first_index_by_min", Value::Object(firsts)),
    ]))?;
    Ok(())
}

fn cmd_sylvester(text: &str, interval_route: bool, cfg: &RunConfig, sink: &mut Sink<'_>) -> Outcome {
    let x = parse_set(text)?;
    let d = delta(&x)?;
    let rows: Vec<(SylvesterPower, u32)> = if interval_route {
        let (m, n) = parse_range(text)?;
        let sieve = crate::primes::Sieve::new(n.max(2));
        interval_sylvester_powers(Interval::new(m, n)?, &sieve)
            .into_iter()
            .map(|p| {
                let dv = valuation(&p.prime, &d)?;
                Ok((p, dv))
            })
            .collect::<Result<_>>()?
    } else {
        let report = verify_delta_divisibility(&x, &cfg.factoring)?;
        report
            .checks
            .into_iter()
            .map(|c| (c.power, c.delta_valuation))
            .collect()
    };
    for (p, dv) in &rows {
        sink.emit(&power_record(p, *dv))?;
    }
    let holds = rows.iter().all(|(p, dv)| p.exponent == *dv);
    sink.emit(&record(vec![
        ("set", json!(x.to_string())),
        ("powers", json!(rows.len())),
        ("delta", json!(d.to_string())),
        ("status", json!(if holds { "ok" } else { "violation" })),
    ]))?;
    Ok(())
}

fn power_record(p: &SylvesterPower, delta_valuation: u32) -> Value {
    record(vec![
        ("power", json!(p.to_string())),
        ("prime", json!(p.prime.to_string())),
        ("exponent", json!(p.exponent)),
        ("delta_exponent", json!(delta_valuation)),
        (
            "status",
            json!(if delta_valuation == p.exponent {
                "ok"
            } else {
                "violation"
            }),
        ),
    ])
}

fn new_scan(kind: &ScanKind, cfg: &RunConfig) -> Result<Box<dyn Scan>> {
    Ok(match kind {
        ScanKind::Quadruple { bound, chunk } => Box::new(QuadrupleScan::new(QuadrupleParams {
            bound: *bound,
            chunk: *chunk,
        })?),
        ScanKind::ErdosNiven { n, chunk } => Box::new(ErdosNivenScan::new(ErdosNivenParams { n: *n, chunk: *chunk })?),
        ScanKind::Tk { n_max, m_max, chunk } => Box::new(TkScan::new(TkParams {
            m_max: m_max.unwrap_or(*n_max),
            n_max: *n_max,
            chunk: *chunk,
        })?),
        ScanKind::NuCollision { pool, size, chunk } => Box::new(NuCollisionScan::new(NuCollisionParams {
            pool: parse_set(pool)?,
            size: *size,
            cap: cfg.subset_cap,
            chunk: *chunk,
        })?),
        ScanKind::Nonintegrality {
            m,
            d,
            k,
            powered,
            weighted,
            seed,
            chunk,
        } => Box::new(NonintegralityScan::new(NonintegralityParams {
            m: parse_range(m)?,
            d: parse_range(d)?,
            k: parse_range(k)?,
            powered_samples: *powered,
            weighted_samples: *weighted,
            seed: *seed,
            chunk: *chunk,
        })?),
    })
}

fn cmd_scan(args: &ScanArgs, cfg: &RunConfig, pool: &rayon::ThreadPool, sink: &mut Sink<'_>) -> Outcome {
    let checkpoint = args.resume.as_deref().map(Checkpoint::from_token).transpose()?;
    let mut scan = match (&args.kind, &checkpoint) {
        (Some(kind), _) => new_scan(kind, cfg)?,
        (None, Some(cp)) => scan_from_checkpoint(cp)?,
        (None, None) => return Err(Error::parse("give a scan kind or --resume TOKEN").into()),
    };
    let mut io_err = None;
    let result = run_scan(scan.as_mut(), checkpoint.as_ref(), pool, &mut |r| {
        let v = serde_json::to_value(r).expect("serializes");
        sink.emit(&v).map_err(|e| {
            io_err = Some(e);
            Error::resource("output", 0, 0)
        })
    });
    if let Some(e) = io_err {
        return Err(e.into());
    }
    result?;
    Ok(())
}

fn cmd_coprime(cmd: &CoprimeCommand, cfg: &RunConfig, sink: &mut Sink<'_>) -> Outcome {
    match cmd {
        CoprimeCommand::Check { set } => {
            let ground = CoprimeGround::new(parse_set(set)?)?;
            let r = verify_coprime_injectivity(&ground, cfg.subset_cap)?;
            for pair in &r.delta_collisions {
                sink.emit(&record(vec![
                    ("collision", json!("delta")),
                    ("first", json!(pair.first)),
                    ("second", json!(pair.second)),
                ]))?;
            }
            for pair in &r.sigma_collisions {
                sink.emit(&record(vec![
                    ("collision", json!("sigma")),
                    ("first", json!(pair.first)),
                    ("second", json!(pair.second)),
                ]))?;
            }
            sink.emit(&record(vec![
                ("status", json!(if r.holds() { "ok" } else { "violation" })),
                ("subsets", json!(r.subsets)),
                ("delta_injective", json!(r.delta_collisions.is_empty())),
                (
                    "delta_collisions_only_from_one",
                    json!(r.delta_collisions_only_from_one()),
                ),
                ("sigma_injective", json!(r.sigma_collisions.is_empty())),
                (
                    "integral",
                    json!(r.integral.iter().map(ToString::to_string).collect::<Vec<_>>()),
                ),
            ]))?;
        }
        CoprimeCommand::Hunter { primes, exponents } => {
            let exps = if exponents.is_empty() {
                vec![1; primes.len()]
            } else {
                exponents.clone()
            };
            let r = prime_hunter(primes, &exps, &cfg.factoring)?;
            sink.emit(&record(vec![
                ("nu", json!(r.nu.to_string())),
                ("coprime_to_inputs", json!(r.coprime_to_inputs)),
                ("factors", json!(r.factors.to_string())),
                ("complete", json!(r.complete)),
                ("status", json!(if r.coprime_to_inputs { "ok" } else { "violation" })),
            ]))?;
        }
        CoprimeCommand::FirstPrimes { k } => {
            for row in first_primes_nu(*k, &cfg.factoring)? {
                let ok = row.exceeds_bound && row.divisors_exceed_pk;
                sink.emit(&record(vec![
                    ("k", json!(row.k)),
                    ("nu", json!(row.nu.to_string())),
                    ("factors", json!(row.factors.to_string())),
                    ("exceeds_bound", json!(row.exceeds_bound)),
                    ("divisors_exceed_pk", json!(row.divisors_exceed_pk)),
                    ("complete", json!(row.complete)),
                    ("status", json!(if ok { "ok" } else { "violation" })),
                ]))?;
            }
        }
        CoprimeCommand::LowerBound { set } => {
            let c = parse_set(set)?;
            let ok = check_nu_lower_bound(&c)?;
            sink.emit(&record(vec![
                ("set", json!(c.to_string())),
                ("nu", json!(nu(&c)?.to_string())),
                ("status", json!(if ok { "ok" } else { "violation" })),
            ]))?;
        }
        CoprimeCommand::Histogram { set } => {
            for (digits, count) in nu_digit_histogram(&parse_set(set)?, cfg.subset_cap)? {
                sink.emit(&record(vec![("nu_digits", json!(digits)), ("subsets", json!(count))]))?;
            }
        }
    }
    Ok(())
}

fn read_profile(path: &PathBuf) -> Result<Vec<ProfileRecord>> {
    let f = File::open(path).map_err(|e| Error::parse(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| Error::parse(e.to_string()))?;
        if v.get("prime").is_some() {
            out.push(serde_json::from_value(v).map_err(|e| Error::parse(e.to_string()))?);
        }
    }
    Ok(out)
}

fn cmd_stars(
    b: &Nat,
    depth: u32,
    from: Option<&PathBuf>,
    pb_bound: Option<u64>,
    cfg: &RunConfig,
    sink: &mut Sink<'_>,
    stderr: &mut (dyn Write + Send),
) -> Outcome {
    let profile = match from {
        Some(path) => {
            let mut p = StarProfile::from_records(&read_profile(path)?)?;
            if &p.b != b {
                return Err(Error::parse(format!("{} holds a profile of {}, not {b}", path.display(), p.b)).into());
            }
            p.extend(depth, &cfg.factoring, cfg.levels.digit_cap)?;
            p
        }
        None => exponent_profile(b, depth, &cfg.factoring, cfg.levels.digit_cap)?,
    };
    let stable = profile.verify();
    for r in profile.records() {
        sink.emit(&serde_json::to_value(&r).expect("serializes"))?;
    }
    let status = match (&stable, profile.truncated) {
        (Err(_), _) => "violation",
        (Ok(()), true) => "truncated",
        (Ok(()), false) => "ok",
    };
    let mut summary = vec![
        ("b", json!(b.to_string())),
        ("depth", json!(profile.depth)),
        ("requested_depth", json!(depth)),
        ("primes", json!(profile.entries.len())),
        ("status", json!(status)),
    ];
    if let Err(why) = &stable {
        summary.push(("reason", json!(why)));
    }
    sink.emit(&record(summary))?;
    if profile.truncated {
        writeln!(
            stderr,
            "warning: factoring budget exhausted; profile verified through depth {}",
            profile.depth
        )?;
    }
    if let Some(bound) = pb_bound {
        let r = pb_membership(b, profile.depth, bound);
        sink.emit(&record(vec![
            ("prime_bound", json!(bound)),
            ("observed", json!(r.observed)),
            ("unobserved", json!(r.unobserved)),
            ("excluded", json!(r.excluded)),
        ]))?;
    }
    Ok(())
}

fn cmd_verify(quick: bool, only: &[String], cfg: &RunConfig, sink: &mut Sink<'_>) -> Outcome {
    let all = crate::checks::catalog(quick);
    for name in only {
        if !all.iter().any(|c| c.name == name) {
            return Err(Error::parse(format!("unknown check {name:?}")).into());
        }
    }
    for check in all
        .iter()
        .filter(|c| only.is_empty() || only.iter().any(|n| n == c.name))
    {
        let outcome = (check.run)(cfg)?;
        let mut rec = vec![
            ("check", json!(check.name)),
            ("status", json!(if outcome.holds { "ok" } else { "violation" })),
        ];
        rec.push(("detail", json!(outcome.detail)));
        sink.emit(&record(rec))?;
    }
    Ok(())
}

/// Convenience for the binary: run on the process arguments.
pub fn main_with_env() -> i32 {
    let mut out = io::stdout();
    let mut err = io::stderr();
    let code = run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    code
}
