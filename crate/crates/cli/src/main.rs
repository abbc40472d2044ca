//! `tcer`: run timed CEL queries over JSON-Lines streams, compile and
//! determinize automata, and test the engines against each other.
//!
//! Exit codes: 0 ok, 1 mismatch, 2 usage or class error, 3 malformed input.

mod bench;
mod diff;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use tcer_core::cea::eval_cea_oracle_with;
use tcer_core::cel::{eval_cel_oracle_with, OracleConfig, OracleError};
use tcer_core::compiler::simplify;
use tcer_core::determinize::{check_sync_with, DEFAULT_SYNC_CAP};
use tcer_core::io::{match_line, read_automaton, read_stream, write_automaton, StreamReader};
use tcer_core::samples::hot_at_least_40;
use tcer_core::{compile, compile_windowed, determinize, parse_query, streamable, CelFormula, ComplexEvent, Evaluator, TimedCea};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "tcer", version, about = "Timed complex event recognition over timestamped streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query or automaton over a stream; prints one JSON line per match.
    Run(RunArgs),
    /// Compile a query into an automaton (JSON).
    Compile(CompileArgs),
    /// Determinize an automaton whose resets are synchronous.
    Determinize(DeterminizeArgs),
    /// Decide whether an automaton's resets are synchronous; prints a verdict.
    CheckSync(CheckSyncArgs),
    /// Measure streaming update latency and enumeration delay on a generated stream.
    Bench(bench::BenchArgs),
    /// Compare the oracle, compiled and streaming engines on random cases.
    DiffTest(diff::DiffArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Brute-force evaluation of the query.
    Oracle,
    /// Brute-force run enumeration of the compiled automaton.
    Automaton,
    /// The incremental evaluator.
    Streaming,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// Query file, or the query text itself if no such file exists.
    #[arg(long)]
    query: Option<String>,
    /// Automaton JSON file.
    #[arg(long)]
    automaton: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// JSON-Lines stream file, `-` for standard input.
    #[arg(long)]
    stream: PathBuf,
    #[arg(long, value_enum, default_value = "streaming")]
    engine: Engine,
    /// Treat `temp > 40` filters as `temp >= 40`.
    #[arg(long, requires = "query")]
    fixture_ge40: bool,
    /// Longest stream the brute-force engines accept.
    #[arg(long, default_value_t = 14)]
    oracle_cap: usize,
}

#[derive(Args)]
struct CompileArgs {
    /// Query file, or the query text itself if no such file exists.
    #[arg(long)]
    query: String,
    /// Use the two-clock construction for windowed queries.
    #[arg(long)]
    windowed: bool,
    /// Output file; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DeterminizeArgs {
    #[arg(long)]
    automaton: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckSyncArgs {
    #[arg(long)]
    automaton: PathBuf,
    /// Exploration budget in joint states.
    #[arg(long, default_value_t = DEFAULT_SYNC_CAP)]
    cap: usize,
}

pub fn load_query(arg: &str) -> Result<CelFormula, CliError> {
    let path = Path::new(arg);
    let text = if path.is_file() { std::fs::read_to_string(path)? } else { arg.to_string() };
    parse_query(&text).map_err(|e| CliError::Input(format!("query: {e}")))
}

fn load_automaton(path: &Path) -> Result<TimedCea, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let a = read_automaton(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    a.validate().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(a)
}

fn open_stream(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdin().lock()));
    }
    let f = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn oracle_failure(e: OracleError) -> CliError {
    CliError::Usage(format!("{e}; use the streaming engine or raise --oracle-cap"))
}

fn run(args: RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let phi = match &args.source.query {
        Some(q) => {
            let phi = load_query(q)?;
            Some(if args.fixture_ge40 { hot_at_least_40(&phi) } else { phi })
        }
        None => None,
    };
    let loaded = args.source.automaton.as_deref().map(load_automaton).transpose()?;
    let cfg = OracleConfig { stream_cap: args.oracle_cap, ..OracleConfig::default() };

    if args.engine == Engine::Streaming {
        // Class problems surface before any input is read.
        let a = match (&phi, loaded) {
            (Some(phi), _) => streamable(phi).map_err(|e| CliError::Usage(format!("query cannot be streamed: {e}")))?,
            (None, Some(a)) => a,
            (None, None) => unreachable!("clap requires a source"),
        };
        let mut ev = Evaluator::new(&a).map_err(|e| CliError::Usage(format!("automaton cannot be streamed: {e}")))?;
        for item in StreamReader::new(open_stream(&args.stream)?) {
            let (e, t) = item.map_err(|e| CliError::Input(e.to_string()))?;
            ev.push(&e, t).expect("reader enforces increasing timestamps");
            let mut failed = None;
            ev.for_each_output(|c| {
                if failed.is_none() {
                    failed = writeln!(out, "{}", match_line(&c)).err();
                }
            });
            if let Some(e) = failed {
                return Err(e.into());
            }
        }
        return Ok(());
    }

    let s = read_stream(open_stream(&args.stream)?).map_err(|e| CliError::Input(e.to_string()))?;
    let matches: BTreeSet<ComplexEvent> = match (args.engine, &phi, loaded) {
        (Engine::Oracle, Some(phi), _) => eval_cel_oracle_with(phi, &s, &cfg).map_err(oracle_failure)?,
        (Engine::Oracle, None, _) => return Err(CliError::Usage("the oracle engine needs --query".into())),
        (_, Some(phi), _) => eval_cea_oracle_with(&compile(phi), &s, &cfg).map_err(oracle_failure)?,
        (_, None, Some(a)) => eval_cea_oracle_with(&a, &s, &cfg).map_err(oracle_failure)?,
        (_, None, None) => unreachable!("clap requires a source"),
    };
    let mut ordered: Vec<&ComplexEvent> = matches.iter().collect();
    ordered.sort_by_key(|c| c.end);
    for c in ordered {
        writeln!(out, "{}", match_line(c))?;
    }
    Ok(())
}

fn compile_cmd(args: CompileArgs) -> Result<(), CliError> {
    let phi = load_query(&args.query)?;
    let a = if args.windowed {
        compile_windowed(&phi).map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        compile(&phi)
    };
    write_output(args.output.as_deref(), &write_automaton(&simplify(&a)))
}

fn determinize_cmd(args: DeterminizeArgs) -> Result<(), CliError> {
    let a = load_automaton(&args.automaton)?;
    let d = determinize(&a).map_err(|e| CliError::Usage(e.to_string()))?;
    write_output(args.output.as_deref(), &write_automaton(&simplify(&d)))
}

fn check_sync_cmd(args: CheckSyncArgs) -> Result<(), CliError> {
    let a = load_automaton(&args.automaton)?;
    let verdict = check_sync_with(&a, args.cap);
    println!("{}", serde_json::to_string(&verdict).expect("verdicts serialize"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            run(args, &mut out).and_then(|()| out.flush().map_err(CliError::from))
        }
        Command::Compile(args) => compile_cmd(args),
        Command::Determinize(args) => determinize_cmd(args),
        Command::CheckSync(args) => check_sync_cmd(args),
        Command::Bench(args) => bench::bench(args),
        Command::DiffTest(args) => diff::diff_test(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tcer: {e}");
            ExitCode::from(e.code())
        }
    }
}
