//! Latency report for the streaming evaluator on a generated stream.

use std::collections::BTreeSet;
use std::time::Instant;

use clap::Args;
use rand::seq::IteratorRandom;
use rand::Rng;
use serde::Serialize;

use tcer_core::gen::rng;
use tcer_core::streaming::Stats;
use tcer_core::{streamable, CelFormula, Event, Evaluator, Predicate, Rational, TimedStream, Value};

use crate::{load_query, CliError};

#[derive(Args)]
pub struct BenchArgs {
    /// Query file, or the query text itself if no such file exists.
    #[arg(long)]
    query: String,
    #[arg(long, default_value_t = 100_000)]
    events: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct Decile {
    events: usize,
    mean_update_ns: f64,
    /// Longest wait for one output, including the wait for the first.
    max_delay_ns: u128,
    /// Most nodes visited for one output.
    max_delay_steps: usize,
    matches: usize,
}

#[derive(Serialize)]
struct Report {
    query: String,
    events: usize,
    seed: u64,
    states: usize,
    deciles: Vec<Decile>,
    stats: Stats,
}

fn attributes(p: &Predicate, out: &mut BTreeSet<String>) {
    match p {
        Predicate::Basic { attr, .. } => {
            out.insert(attr.clone());
        }
        Predicate::And(a, b) => {
            attributes(a, out);
            attributes(b, out);
        }
        Predicate::Not(q) => attributes(q, out),
        Predicate::TypeIs(_) | Predicate::True => {}
    }
}

/// Events of the query's types carrying every attribute it filters on,
/// valued in `0..100`, one to ten tenths of a time unit apart.
fn stream_for(phi: &CelFormula, n: usize, seed: u64) -> TimedStream {
    let types: Vec<String> = phi.event_types().into_iter().collect();
    let mut attrs = BTreeSet::new();
    phi.walk(&mut |f| {
        if let CelFormula::Filter(_, _, p) = f {
            attributes(p, &mut attrs);
        }
    });
    let mut r = rng(seed);
    let mut s = TimedStream::new();
    let mut t = Rational::ZERO;
    for _ in 0..n {
        t = t + Rational::new(r.gen_range(1..=10), 10);
        let ty = types.iter().choose(&mut r).map_or("E", String::as_str);
        let mut e = Event::new(ty);
        for a in &attrs {
            e = e.with(a, Value::Int(r.gen_range(0..100)));
        }
        s.push(e, t).expect("increasing");
    }
    s
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let phi = load_query(&args.query)?;
    let a = streamable(&phi).map_err(|e| CliError::Usage(format!("query cannot be streamed: {e}")))?;
    let s = stream_for(&phi, args.events, args.seed);
    let mut ev = Evaluator::new(&a).expect("streamable automata load");
    let chunk = args.events.div_ceil(10).max(1);
    let mut deciles = Vec::new();
    for part in s.items().chunks(chunk) {
        let mut d = Decile { events: part.len(), mean_update_ns: 0.0, max_delay_ns: 0, max_delay_steps: 0, matches: 0 };
        let mut update_ns = 0u128;
        for (e, t) in part {
            let start = Instant::now();
            ev.push(e, *t).expect("increasing");
            update_ns += start.elapsed().as_nanos();
            let mut last = Instant::now();
            ev.for_each_output_traced(|_, steps| {
                let now = Instant::now();
                d.max_delay_ns = d.max_delay_ns.max((now - last).as_nanos());
                d.max_delay_steps = d.max_delay_steps.max(steps);
                d.matches += 1;
                last = now;
            });
        }
        d.mean_update_ns = update_ns as f64 / part.len() as f64;
        deciles.push(d);
    }
    let report = Report {
        query: phi.to_string(),
        events: args.events,
        seed: args.seed,
        states: a.num_states,
        deciles,
        stats: ev.stats(),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(())
}
