//! Randomized differential testing: the query oracle against the compiled
//! automata and the streaming evaluator, with greedy shrinking of failures.

use std::collections::{BTreeMap, BTreeSet};

use clap::Args;
use rand::Rng;
use serde::Serialize;

use tcer_core::cea::eval_cea_oracle_with;
use tcer_core::cel::{eval_cel_oracle_with, OracleConfig};
use tcer_core::gen::{random_formula, random_stream, rng};
use tcer_core::io::{event_line, match_line};
use tcer_core::{classify, compile, compile_windowed, evaluate, streamable, CelFormula, ComplexEvent, TimedStream};

use crate::CliError;

#[derive(Args)]
pub struct DiffArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    cases: usize,
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    #[arg(long, default_value_t = 10)]
    max_stream: usize,
}

type Set = BTreeSet<ComplexEvent>;

#[derive(Default, Serialize)]
struct Summary {
    cases: usize,
    /// Cases whose oracle result exceeded its size limit.
    skipped: usize,
    windowed: usize,
    streamed: usize,
    matches: usize,
    mismatches: usize,
}

/// Results per engine; engines that do not apply to the case are absent.
fn outcomes(phi: &CelFormula, s: &TimedStream) -> Option<BTreeMap<&'static str, Set>> {
    let cfg = OracleConfig { stream_cap: s.len().max(1), ..OracleConfig::default() };
    let mut out = BTreeMap::new();
    out.insert("oracle", eval_cel_oracle_with(phi, s, &cfg).ok()?);
    out.insert("compiled", eval_cea_oracle_with(&compile(phi), s, &cfg).ok()?);
    if classify(phi).windowed {
        if let Ok(a) = compile_windowed(phi) {
            out.insert("windowed", eval_cea_oracle_with(&a, s, &cfg).ok()?);
        }
    }
    if let Ok(a) = streamable(phi) {
        let per_position = evaluate(&a, s).expect("streamable automata load");
        out.insert("streaming", per_position.into_iter().flatten().collect());
    }
    Some(out)
}

fn disagrees(phi: &CelFormula, s: &TimedStream) -> bool {
    outcomes(phi, s).is_some_and(|o| o.values().any(|v| *v != o["oracle"]))
}

fn without(s: &TimedStream, k: usize) -> TimedStream {
    let items = s.items().iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x.clone()).collect();
    TimedStream::from_items(items).expect("subsequences stay increasing")
}

/// Drops events, then replaces the query by failing subqueries, until no
/// single step keeps the disagreement.
fn shrink(mut phi: CelFormula, mut s: TimedStream) -> (CelFormula, TimedStream) {
    loop {
        if let Some(k) = (0..s.len()).find(|&k| disagrees(&phi, &without(&s, k))) {
            s = without(&s, k);
            continue;
        }
        if let Some(sub) = phi.children().into_iter().find(|c| disagrees(c, &s)).cloned() {
            phi = sub;
            continue;
        }
        return (phi, s);
    }
}

#[derive(Serialize)]
struct Repro {
    case_seed: u64,
    query: String,
    stream: Vec<String>,
    results: BTreeMap<&'static str, Vec<String>>,
}

pub fn diff_test(args: DiffArgs) -> Result<(), CliError> {
    if args.max_depth == 0 {
        return Err(CliError::Usage("--max-depth must be at least 1".into()));
    }
    let mut seeds = rng(args.seed);
    let mut summary = Summary::default();
    for _ in 0..args.cases {
        let case_seed: u64 = seeds.gen();
        let mut r = rng(case_seed);
        let depth = r.gen_range(1..=args.max_depth);
        let phi = random_formula(&mut r, depth);
        let n = r.gen_range(0..=args.max_stream);
        let s = random_stream(&mut r, n);
        summary.cases += 1;
        let Some(results) = outcomes(&phi, &s) else {
            summary.skipped += 1;
            continue;
        };
        summary.windowed += usize::from(results.contains_key("windowed"));
        summary.streamed += usize::from(results.contains_key("streaming"));
        summary.matches += results["oracle"].len();
        if results.values().all(|v| *v == results["oracle"]) {
            continue;
        }
        summary.mismatches += 1;
        let (phi, s) = shrink(phi, s);
        let results = outcomes(&phi, &s).expect("shrinking keeps the case evaluable");
        let repro = Repro {
            case_seed,
            query: phi.to_string(),
            stream: s.iter().map(|(e, t)| event_line(e, *t)).collect(),
            results: results.into_iter().map(|(k, v)| (k, v.iter().map(match_line).collect())).collect(),
        };
        println!("{}", serde_json::to_string_pretty(&repro).expect("reports serialize"));
        println!("{}", serde_json::to_string(&summary).expect("reports serialize"));
        return Err(CliError::Mismatch(format!("engines disagree on case seed {case_seed}")));
    }
    println!("{}", serde_json::to_string(&summary).expect("reports serialize"));
    Ok(())
}
