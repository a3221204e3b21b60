mod pretty;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use sumset_core::isomorphism::{embed_bp_as_two_lines, is_f2_isomorphism, pairing, planar_sumset_stats, F2Progression};
use sumset_core::progressions::{ap_cover, bp_cover, bp_cover_within};
use sumset_core::search::{frontier_search, ratio_histogram, SearchConfig};
use sumset_core::sumset::stats;
use sumset_core::verify::{analyze, family_row, family_table, sweep, AnalyzeOptions, ClaimId, Family, SweepConfig};
use sumset_core::{parse_set, Error, IntSet};

const SCHEMA_VERSION: u32 = 1;

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CEILING: u8 = 3;

#[derive(Parser)]
#[command(name = "sumset", version, about = "Sumsets, progression covers and structure checks for finite integer sets")]
struct Cli {
    /// Human-readable rendering of the JSON envelope.
    #[arg(long, global = true, conflicts_with = "json")]
    pretty: bool,
    /// JSON envelope on stdout (default).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Full structure report for one set.
    Analyze(AnalyzeArgs),
    /// Minimal AP and BP covers.
    Cover(CoverArgs),
    /// F2-isomorphism checks and constructions.
    #[command(subcommand)]
    Iso(IsoCommand),
    /// Exhaustive sweep of canonical sets against the selected claims.
    Verify(VerifyArgs),
    /// Structure-failing sets of size k at minimal deficiency.
    Search(SearchArgs),
    /// Parametric example families and their deficiency identities.
    Examples(ExamplesArgs),
    /// Doubling-ratio histogram of canonical sets.
    Histogram(HistogramArgs),
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    /// Set literal such as `0-12,45,57`.
    set: String,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    /// Ratio bound of the weak claim, `p/q` or decimal.
    #[arg(long, default_value = "33/10")]
    alpha: String,
}

#[derive(Args, Serialize)]
struct CoverArgs {
    set: String,
    /// Also report whether a BP of at most this total length exists.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum IsoCommand {
    /// Checks the map sending the i-th element of FROM to element perm[i] of TO.
    Map {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Comma-separated permutation; identity when omitted.
        #[arg(long)]
        perm: Option<String>,
    },
    /// Embeds a set into the two-lines set through its minimal BP cover.
    Embed { set: String },
    /// Properness and rank of P(x0; x1, x2; b1, b2).
    Rank {
        #[arg(long, allow_hyphen_values = true)]
        x0: i64,
        #[arg(long, allow_hyphen_values = true)]
        x1: i64,
        #[arg(long, allow_hyphen_values = true)]
        x2: i64,
        #[arg(long)]
        b1: u64,
        #[arg(long)]
        b2: u64,
    },
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    max_span: u64,
    /// Comma-separated claim ids: freiman_small_b, 3k3, main, weak.
    #[arg(long, default_value = "freiman_small_b,3k3,main")]
    claims: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Exit with the resource-ceiling code above this many canonical sets.
    #[arg(long, default_value_t = 50_000_000)]
    max_sets: u64,
    #[arg(long, default_value = "33/10")]
    alpha: String,
}

#[derive(Args, Serialize)]
struct SearchArgs {
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 40)]
    max_span: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node budget of the exhaustive phase.
    #[arg(long, default_value_t = 200_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 16)]
    restarts: u64,
    #[arg(long, default_value_t = 4_000)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1_000)]
    max_records: usize,
    /// One JSON record per line instead of the envelope.
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args, Serialize)]
struct ExamplesArgs {
    /// Materialize a single member: ex12 (needs --a, --c), ex15 or ex16 (need --k).
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    a: Option<u64>,
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    /// Span limit of the identity table.
    #[arg(long, default_value_t = 400)]
    max_span: u64,
}

#[derive(Args, Serialize)]
struct HistogramArgs {
    #[arg(long)]
    max_span: u64,
    /// CSV on stdout instead of the envelope.
    #[arg(long)]
    csv: bool,
}

#[derive(Serialize)]
struct ReportEnvelope {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    input: Value,
    report: Value,
    wall_time_ms: f64,
}

enum Outcome {
    Report { report: Value, violation: bool },
    Raw { text: String, violation: bool },
}

fn set_arg(text: &str) -> Result<IntSet, Error> {
    parse_set(text)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run(command: &Command) -> Result<Outcome, Error> {
    let report = |report: Value| Ok(Outcome::Report { report, violation: false });
    match command {
        Command::Analyze(args) => {
            let opts = AnalyzeOptions { theta: args.theta, alpha: args.alpha.parse()? };
            report(to_value(&analyze(&set_arg(&args.set)?, &opts)?))
        }
        Command::Cover(args) => {
            let a = set_arg(&args.set)?;
            let within = args.budget.map(|b| bp_cover_within(&a, b));
            report(json!({
                "set": a,
                "stats": stats(&a),
                "ap": ap_cover(&a),
                "bp": bp_cover(&a),
                "bp_within_budget": within,
            }))
        }
        Command::Iso(iso) => run_iso(iso),
        Command::Verify(args) => {
            let claims = args.claims.split(',').map(str::parse).collect::<Result<Vec<ClaimId>, _>>()?;
            let mut cfg = SweepConfig::new(args.max_span, claims);
            cfg.workers = args.workers;
            cfg.max_sets = args.max_sets;
            cfg.alpha = args.alpha.parse()?;
            let summary = sweep(&cfg)?;
            Ok(Outcome::Report { violation: summary.violation_count() > 0, report: to_value(&summary) })
        }
        Command::Search(args) => {
            let cfg = SearchConfig {
                k: args.k,
                max_span: args.max_span,
                budget: args.budget,
                seed: args.seed,
                restarts: args.restarts,
                steps: args.steps,
                workers: args.workers,
                max_records: args.max_records,
            };
            let out = frontier_search(&cfg)?;
            let violation = out.records.iter().any(|r| r.applicable);
            if args.jsonl {
                let lines: Vec<String> = out.records.iter().map(|r| serde_json::to_string(r).expect("records serialize")).collect();
                return Ok(Outcome::Raw { text: lines.iter().map(|l| format!("{l}\n")).collect(), violation });
            }
            Ok(Outcome::Report { violation, report: to_value(&out) })
        }
        Command::Examples(args) => match &args.family {
            None => report(json!({ "max_span": args.max_span, "rows": family_table(args.max_span)? })),
            Some(name) => {
                let missing = |p: &str| Error::InvalidParameters(format!("{name} needs --{p}"));
                let family = match name.as_str() {
                    "ex12" => Family::Ex12 { a: args.a.ok_or_else(|| missing("a"))?, c: args.c.ok_or_else(|| missing("c"))? },
                    "ex15" => Family::Ex15 { k: args.k.ok_or_else(|| missing("k"))? },
                    "ex16" => Family::Ex16 { k: args.k.ok_or_else(|| missing("k"))? },
                    other => return Err(Error::InvalidParameters(format!("unknown family `{other}`"))),
                };
                let set = family.materialize()?;
                report(json!({ "set": set, "literal": set.render(), "row": family_row(family)? }))
            }
        },
        Command::Histogram(args) => {
            let h = ratio_histogram(args.max_span)?;
            if args.csv {
                return Ok(Outcome::Raw { text: h.to_csv(), violation: false });
            }
            report(to_value(&h))
        }
    }
}

fn run_iso(iso: &IsoCommand) -> Result<Outcome, Error> {
    let report = match iso {
        IsoCommand::Map { from, to, perm } => {
            let (a, b) = (set_arg(from)?, set_arg(to)?);
            let perm: Vec<usize> = match perm {
                Some(p) => p
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|_| Error::InvalidParameters(format!("bad permutation entry `{t}`"))))
                    .collect::<Result<_, _>>()?,
                None => (0..a.len()).collect(),
            };
            let pairs = pairing(&a, &b, &perm)?;
            json!({ "from": a, "to": b, "perm": perm, "is_f2_isomorphism": is_f2_isomorphism(&pairs)? })
        }
        IsoCommand::Embed { set } => {
            let a = set_arg(set)?;
            let cover = bp_cover(&a).ok_or_else(|| Error::NotCovered)?;
            let e = embed_bp_as_two_lines(&cover, &a)?;
            let image_stats = planar_sumset_stats(&e.image);
            json!({
                "set": a,
                "cover": cover,
                "embedding": e,
                "is_f2_isomorphism": is_f2_isomorphism(&e.as_pairs())?,
                "doubling": stats(&a).doubling,
                "image_doubling": image_stats.doubling,
            })
        }
        IsoCommand::Rank { x0, x1, x2, b1, b2 } => {
            let p = F2Progression::new(*x0, *x1, *x2, *b1, *b2)?;
            json!({ "progression": p, "proper": p.is_proper(), "rank": p.rank() })
        }
    };
    Ok(Outcome::Report { report, violation: false })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceCeiling(_) => EXIT_CEILING,
        _ => EXIT_USAGE,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Cover(_) => "cover",
        Command::Iso(_) => "iso",
        Command::Verify(_) => "verify",
        Command::Search(_) => "search",
        Command::Examples(_) => "examples",
        Command::Histogram(_) => "histogram",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let mut stdout = std::io::stdout().lock();
    let violation = match outcome {
        Outcome::Raw { text, violation } => {
            let _ = stdout.write_all(text.as_bytes());
            violation
        }
        Outcome::Report { report, violation } => {
            let envelope = ReportEnvelope {
                schema_version: SCHEMA_VERSION,
                tool: "sumset",
                version: env!("CARGO_PKG_VERSION"),
                command: command_name(&cli.command),
                input: to_value(&cli.command),
                report,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            let value = to_value(&envelope);
            let text = if cli.pretty { pretty::render(&value) } else { format!("{value}\n") };
            let _ = stdout.write_all(text.as_bytes());
            violation
        }
    };
    if violation {
        ExitCode::from(EXIT_VIOLATION)
    } else {
        ExitCode::SUCCESS
    }
}
