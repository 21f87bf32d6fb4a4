//! `decomp`: solve first-order formulas over equality, additive rationals or
//! trees, cross-check the solver against brute-force oracles, and run the
//! game benchmarks.
//!
//! Exit codes: 0 success, 1 parse or signature error, 2 resource limit,
//! 3 internal invariant violation, 4 disagreement with an oracle.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use decomp::engine::{finalize_closed, replay, solve, Disjunction, Fault, Limits, Options, SolveError, TraceStep};
use decomp::eq::EqTheory;
use decomp::formula::{free_vars, Formula, Signature, TheoryTag, Vars};
use decomp::games::{gen_winning, run_bench, BenchRow, GameSpec, RowStatus};
use decomp::gen::{random_sentence, GenConfig};
use decomp::normalize::{normalize, to_working, working_to_formula};
use decomp::oracles::{eq_oracle, ra_oracle};
use decomp::ra::RaTheory;
use decomp::syntax::{parse_formula_in, parse_signature, print_formula, Scope};
use decomp::theory::Theory;
use decomp::trees::TreesTheory;

const EXIT_PARSE: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_DISAGREE: u8 = 4;

#[derive(Parser)]
#[command(name = "decomp", version, about = "Decision procedure for decomposable first-order theories")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a formula and print the result.
    Solve(SolveArgs),
    /// Solve a formula, print its rewriting trace as JSON lines and replay it.
    Trace(SolveArgs),
    /// Compare solver verdicts with the brute-force oracle on random sentences.
    Check(CheckArgs),
    /// Solve winning_k for k = 0..=K and validate against brute force.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoryArg {
    Eq,
    Ra,
    Trees,
}

impl From<TheoryArg> for TheoryTag {
    fn from(t: TheoryArg) -> TheoryTag {
        match t {
            TheoryArg::Eq => TheoryTag::Eq,
            TheoryArg::Ra => TheoryTag::Ra,
            TheoryArg::Trees => TheoryTag::Trees,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// The conjunction of solved formulas.
    Solved,
    /// A disjunction of solved conjunctions equivalent to the input.
    Disjunct,
    /// `true` or `false`; the input must be a sentence.
    Verdict,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    Rule4DropsAllChildren,
    Rule3SharesNames,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::Rule4DropsAllChildren => Fault::Rule4DropsAllChildren,
            FaultArg::Rule3SharesNames => Fault::Rule3SharesNames,
        }
    }
}

#[derive(Args, Clone)]
struct LimitArgs {
    /// Rewriting steps allowed per solve [default: 10000000].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
    /// Largest working-formula depth [default: 64, 512 for bench].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: Option<u64>,
    /// Largest node count of the working conjunction [default: 100000000].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_nodes: Option<u64>,
    /// Wall-clock limit per solve.
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl LimitArgs {
    fn limits(&self, base: Limits) -> Result<Limits, String> {
        if let Some(s) = self.max_seconds {
            if s.is_nan() || s <= 0.0 {
                return Err("--max-seconds must be positive".into());
            }
        }
        Ok(Limits {
            max_steps: self.max_steps.unwrap_or(base.max_steps),
            max_depth: self.max_depth.map_or(base.max_depth, |d| d as usize),
            max_nodes: self.max_nodes.unwrap_or(base.max_nodes),
            max_seconds: self.max_seconds.or(base.max_seconds),
        })
    }
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "formula", "game"])))]
struct SolveArgs {
    /// Theory of the input; implied by `--sig` and `--game`.
    #[arg(long, value_enum)]
    theory: Option<TheoryArg>,
    /// Signature file; defaults to the standard signature of the theory.
    #[arg(long)]
    sig: Option<PathBuf>,
    /// Read the formula from a file, or from stdin with `-`.
    #[arg(long)]
    input: Option<String>,
    /// The formula itself.
    #[arg(long)]
    formula: Option<String>,
    /// Use winning_k of a game as the input.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    game: Option<u8>,
    /// Number of rounds for `--game`.
    #[arg(long, requires = "game", default_value_t = 1)]
    k: u32,
    #[arg(long, value_enum, default_value_t = Mode::Solved)]
    mode: Mode,
    /// Write the rewriting trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a JSON report with statistics and timings.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Switch off the identification steps (rule ids 0 and 6).
    #[arg(long)]
    no_prune: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct CheckArgs {
    /// eq or ra; trees has no oracle for arbitrary sentences.
    #[arg(long, value_enum)]
    theory: TheoryArg,
    /// Number of random sentences.
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Inject a rule defect, as a negative control for the check itself.
    #[arg(long, value_enum)]
    fault: Option<FaultArg>,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    game: u8,
    /// Largest k to run.
    #[arg(long)]
    k: u32,
    /// Largest position component validated; 50 for game 1, 8 for game 2.
    #[arg(long)]
    bound: Option<u64>,
    /// Write the timing table as CSV, one column per k.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the rows as a JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Limit { .. } => EXIT_LIMIT,
            SolveError::Invariant(_) | SolveError::MeasureIncrease { .. } => EXIT_INVARIANT,
            SolveError::Theory(_) | SolveError::NotClosed => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_PARSE, format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

/// The parsed input of `solve` and `trace`.
struct Input {
    sig: Signature,
    vars: Vars,
    formula: Formula,
}

fn load_input(a: &SolveArgs) -> Result<Input, Failure> {
    if let Some(id) = a.game {
        if a.theory.is_some_and(|t| t != TheoryArg::Trees) {
            return Err(Failure::new(EXIT_PARSE, "games are over the trees theory"));
        }
        let g = GameSpec::by_id(id).expect("range checked by clap");
        let mut vars = Vars::new();
        let x = vars.named("x");
        let formula = gen_winning(&g, a.k, x, &mut vars);
        return Ok(Input { sig: g.sig, vars, formula });
    }
    let mut sig = match &a.sig {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let sig = parse_signature(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
            if a.theory.is_some_and(|t| TheoryTag::from(t) != sig.tag) {
                return Err(Failure::new(EXIT_PARSE, "--theory does not match the signature file"));
            }
            sig
        }
        None => match a.theory {
            Some(t) => Signature::for_tag(t.into()),
            None => return Err(Failure::new(EXIT_PARSE, "one of --theory or --sig is required")),
        },
    };
    let text = match (&a.formula, &a.input) {
        (Some(f), _) => f.clone(),
        (None, Some(p)) if p == "-" => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| Failure::new(EXIT_PARSE, format!("stdin: {e}")))?;
            s
        }
        (None, Some(p)) => fs::read_to_string(p).map_err(|e| io_failure(Path::new(p), e))?,
        (None, None) => unreachable!("clap requires an input source"),
    };
    let mut vars = Vars::new();
    let formula = parse_formula_in(text.trim(), &mut sig, &mut vars, &mut Scope::new())
        .map_err(|e| Failure::new(EXIT_PARSE, format!("parse error: {e}")))?;
    sig.open = false;
    Ok(Input { sig, vars, formula })
}

/// What a solve produced, already printed.
struct Outcome {
    text: String,
    stats: serde_json::Value,
    trace: Vec<TraceStep>,
    replay_ok: Option<bool>,
}

fn run<T: Theory>(th: &T, input: Input, a: &SolveArgs, check_replay: bool) -> Result<Outcome, Failure> {
    let Input { sig, mut vars, formula } = input;
    if a.mode == Mode::Verdict && !free_vars(&formula).is_empty() {
        return Err(Failure::new(EXIT_PARSE, "verdict mode needs a sentence"));
    }
    let target = if a.mode == Mode::Disjunct { Formula::not(formula) } else { formula };
    let mut opts = Options { trace: a.trace.is_some() || check_replay, prune: !a.no_prune, ..Options::default() };
    opts.limits = a.limits.limits(opts.limits.clone()).map_err(|m| Failure::new(EXIT_PARSE, m))?;
    let w = to_working(&normalize(&target, &mut vars), th).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let start_vars = vars.clone();
    let r = solve(th, &mut vars, &w, &opts)?;
    let trace = r.trace.unwrap_or_default();
    let print_conj = |ws: &[_], vars: &Vars| -> String {
        if ws.is_empty() {
            return "true".into();
        }
        ws.iter().map(|w| print_formula(&working_to_formula(w, th), &sig, vars)).collect::<Vec<_>>().join("\n& ")
    };
    let replay_ok = if check_replay {
        let again = replay(th, &mut start_vars.clone(), &w, &trace, None)?;
        Some(print_conj(&again, &vars) == print_conj(&r.solved, &vars))
    } else {
        None
    };
    let text = match a.mode {
        Mode::Solved => print_conj(&r.solved, &vars),
        Mode::Disjunct => Disjunction { members: r.solved.clone(), stats: r.stats.clone() }.print(th, &vars),
        Mode::Verdict => finalize_closed(th, &r.solved)?.to_string(),
    };
    let stats = serde_json::to_value(&r.stats).expect("stats serialize");
    Ok(Outcome { text, stats, trace, replay_ok })
}

fn solve_input(input: Input, a: &SolveArgs, check_replay: bool) -> Result<Outcome, Failure> {
    match input.sig.tag {
        TheoryTag::Eq => run(&EqTheory::new(), input, a, check_replay),
        TheoryTag::Ra => run(&RaTheory::new(), input, a, check_replay),
        TheoryTag::Trees => {
            let th = TreesTheory::new(input.sig.clone());
            run(&th, input, a, check_replay)
        }
    }
}

fn trace_lines(trace: &[TraceStep]) -> String {
    trace.iter().map(|s| serde_json::to_string(s).expect("trace serializes") + "\n").collect()
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Solved => "solved",
        Mode::Disjunct => "disjunct",
        Mode::Verdict => "verdict",
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut impl Write) -> Result<(), Failure> {
    let input = load_input(a)?;
    let theory = input.sig.tag;
    let o = solve_input(input, a, false)?;
    if let Some(p) = &a.trace {
        write_file(p, &trace_lines(&o.trace))?;
    }
    if let Some(p) = &a.report {
        let doc = json!({
            "command": "solve",
            "theory": theory.as_str(),
            "mode": mode_name(a.mode),
            "result": o.text,
            "stats": o.stats,
        });
        write_file(p, &(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"))?;
    }
    writeln!(out, "{}", o.text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))
}

fn cmd_trace(a: &SolveArgs, out: &mut impl Write) -> Result<(), Failure> {
    let input = load_input(a)?;
    let o = solve_input(input, a, true)?;
    let lines = trace_lines(&o.trace);
    if let Some(p) = &a.trace {
        write_file(p, &lines)?;
    }
    write!(out, "{lines}").map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    if o.replay_ok != Some(true) {
        return Err(Failure::new(EXIT_INVARIANT, "replaying the trace does not reproduce the result"));
    }
    Ok(())
}

fn cmd_check(a: &CheckArgs, out: &mut impl Write) -> Result<(), Failure> {
    let sig = match a.theory {
        TheoryArg::Eq => Signature::eq(),
        TheoryArg::Ra => Signature::ra(),
        TheoryArg::Trees => return Err(Failure::new(EXIT_PARSE, "check needs a theory with an oracle: eq or ra")),
    };
    let mut opts = Options { fault: a.fault.map(Fault::from), ..Options::default() };
    opts.limits = a.limits.limits(opts.limits.clone()).map_err(|m| Failure::new(EXIT_PARSE, m))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for i in 0..a.count {
        let mut vars = Vars::new();
        let f = random_sentence(&sig, &mut vars, &mut rng, GenConfig::default());
        let want = match a.theory {
            TheoryArg::Eq => eq_oracle(&f),
            _ => ra_oracle(&f, &sig),
        }
        .map_err(|e| Failure::new(EXIT_INVARIANT, format!("oracle failed on sentence {i}: {e}")))?;
        let got = match a.theory {
            TheoryArg::Eq => decomp::engine::decide(&EqTheory::new(), &mut vars, &f, &opts),
            _ => decomp::engine::decide(&RaTheory::new(), &mut vars, &f, &opts),
        };
        let agrees = matches!(got, Ok(b) if b == want);
        if !agrees {
            let got = match got {
                Ok(b) => b.to_string(),
                Err(e) => format!("error: {e}"),
            };
            writeln!(out, "disagreement on sentence {i}\nsentence: {}\nsolver: {got}\noracle: {want}", print_formula(&f, &sig, &vars))
                .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
            return Err(Failure::new(EXIT_DISAGREE, format!("solver and oracle disagree after {i} agreements")));
        }
    }
    writeln!(out, "agreed {}/{} theory={} seed={}", a.count, a.count, TheoryTag::from(a.theory).as_str(), a.seed)
        .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))
}

fn status_word(r: &BenchRow) -> &'static str {
    match r.status {
        RowStatus::Validated => "validated",
        RowStatus::Mismatch { .. } => "mismatch",
        RowStatus::Budget { .. } => "-",
    }
}

/// The timing table with one column per k, budget rows shown as `-`.
fn bench_csv(rows: &[BenchRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["game".to_string(), "measure".to_string()];
    header.extend(rows.iter().map(|r| format!("k={}", r.k)));
    let csv_err = |e: csv::Error| Failure::new(EXIT_PARSE, e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    let game = rows.first().map_or(String::new(), |r| r.game.to_string());
    type Measure = (&'static str, fn(&BenchRow) -> String);
    let measures: [Measure; 5] = [
        ("millis", |r| format!("{:.1}", r.millis)),
        ("steps", |r| r.steps.to_string()),
        ("output_size", |r| r.output_size.to_string()),
        ("disjuncts", |r| r.disjuncts.to_string()),
        ("status", |r| status_word(r).to_string()),
    ];
    for (name, f) in measures {
        let mut rec = vec![game.clone(), name.to_string()];
        rec.extend(rows.iter().map(|r| if status_word(r) == "-" { "-".to_string() } else { f(r) }));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn cmd_bench(a: &BenchArgs, out: &mut impl Write) -> Result<(), Failure> {
    let g = GameSpec::by_id(a.game).expect("range checked by clap");
    let bound = a.bound.unwrap_or(if a.game == 1 { 50 } else { 8 });
    let limits = a.limits.limits(Limits { max_depth: 512, ..Limits::default() }).map_err(|m| Failure::new(EXIT_PARSE, m))?;
    let opts = Options { limits, ..Options::default() };
    let rows = run_bench(&g, a.k, bound, &opts);
    let io_err = |e: io::Error| Failure::new(EXIT_PARSE, e.to_string());
    for r in &rows {
        writeln!(
            out,
            "k={} status={} millis={:.1} steps={} size={} winning=[{}]",
            r.k,
            status_word(r),
            r.millis,
            r.steps,
            r.output_size,
            r.winning.join(" ")
        )
        .map_err(io_err)?;
    }
    if let Some(p) = &a.csv {
        write_file(p, &bench_csv(&rows)?)?;
    }
    if let Some(p) = &a.report {
        let doc = json!({ "command": "bench", "game": a.game, "k_max": a.k, "bound": bound, "rows": rows });
        write_file(p, &(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"))?;
    }
    if let Some(r) = rows.iter().find(|r| matches!(r.status, RowStatus::Budget { .. })) {
        let RowStatus::Budget { reason } = &r.status else { unreachable!() };
        return Err(Failure::new(EXIT_LIMIT, format!("k={}: {reason}", r.k)));
    }
    if let Some(r) = rows.iter().find(|r| matches!(r.status, RowStatus::Mismatch { .. })) {
        return Err(Failure::new(EXIT_DISAGREE, format!("k={}: solution differs from brute force", r.k)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let r = match &cli.cmd {
        Cmd::Solve(a) => cmd_solve(a, &mut out),
        Cmd::Trace(a) => cmd_trace(a, &mut out),
        Cmd::Check(a) => cmd_check(a, &mut out),
        Cmd::Bench(a) => cmd_bench(a, &mut out),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = out.flush();
            eprintln!("decomp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
