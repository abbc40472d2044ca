//! Workloads shared by the benchmarks.

use rand::Rng;
use tcer_core::gen::rng;
use tcer_core::{Event, Rational, TimedStream, Value};

/// Alternating temperature and humidity readings a quarter to one time
/// unit apart.
pub fn sensor_like(n: usize, seed: u64) -> TimedStream {
    let mut r = rng(seed);
    let mut s = TimedStream::new();
    let mut t = Rational::ZERO;
    for _ in 0..n {
        t = t + Rational::new(r.gen_range(1..=4), 4);
        let e = if r.gen_bool(0.5) {
            Event::new("T").with("temp", Value::Int(r.gen_range(10..50)))
        } else {
            Event::new("H").with("hum", Value::Int(r.gen_range(10..80)))
        };
        s.push(e, t).expect("increasing");
    }
    s
}

/// `A` events at integer times with a `B` at every `every`-th position.
pub fn periodic(n: usize, every: usize) -> TimedStream {
    let mut s = TimedStream::new();
    for i in 1..=n {
        let ty = if i % every == 0 { "B" } else { "A" };
        s.push(Event::new(ty), Rational::from_integer(i as i64)).expect("increasing");
    }
    s
}

/// Output-heavy query over [`periodic`]: every pair of `A`s before a `B`
/// inside the window.
pub const PAIRS_BEFORE_B: &str = "(A AS X ; A AS Y ; B AS Z) WITHIN <=60";
