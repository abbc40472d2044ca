//! Seeded random inputs for differential testing and benchmarks.
//!
//! Events have type `A`, `B` or `C` and one integer attribute `v` in `0..5`.
//! Every generator takes an explicit RNG so runs are reproducible from a seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cea::{ClockCondition, Monotonicity, TimedCea, Transition};
use crate::cel::CelFormula;
use crate::model::{Event, Interval, TimedStream, Value, VarSet};
use crate::predicate::{Cmp, Predicate};
use crate::rational::Rational;

pub const TYPES: [&str; 3] = ["A", "B", "C"];
pub const VARS: [&str; 2] = ["X", "Y"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_constant<R: Rng>(rng: &mut R) -> Rational {
    *[Rational::new(1, 2), Rational::ONE, Rational::from_integer(2), Rational::from_integer(3)]
        .choose(rng)
        .expect("non-empty")
}

/// An interval with low in `{0, 1/2, 1, 2}` and high up to three units
/// above it, or unbounded.
pub fn random_interval<R: Rng>(rng: &mut R) -> Interval {
    let lows = [Rational::ZERO, Rational::new(1, 2), Rational::ONE, Rational::from_integer(2)];
    let low = *lows.choose(rng).expect("non-empty");
    let low_open = low > Rational::ZERO && rng.gen_bool(0.3);
    if rng.gen_bool(0.25) {
        return Interval::new(low, None, low_open, true).expect("valid");
    }
    let high = low + Rational::new(rng.gen_range(0..=6), 2);
    let high_open = high > low && rng.gen_bool(0.3);
    let low_open = low_open && high > low;
    Interval::new(low, Some(high), low_open, high_open).expect("valid")
}

pub fn random_value_predicate<R: Rng>(rng: &mut R) -> Predicate {
    let cmps = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ne, Cmp::Ge, Cmp::Gt];
    let cmp = *cmps.choose(rng).expect("non-empty");
    Predicate::basic("v", cmp, Value::Int(rng.gen_range(0..5)))
}

/// A formula of depth at most `depth` in which every operator can occur.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> CelFormula {
    let leaf = |rng: &mut R| CelFormula::event(TYPES.choose(rng).expect("non-empty"));
    if depth <= 1 {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_formula(rng, depth - 1);
    match rng.gen_range(0..15) {
        0 => leaf(rng),
        1 => sub(rng).as_var(VARS.choose(rng).expect("non-empty")),
        2 => {
            let f = sub(rng);
            let vars: Vec<String> = f.variables().into_iter().collect();
            let x = vars.choose(rng).expect("formulas bind something").clone();
            f.filter(&x, random_value_predicate(rng))
        }
        3 => sub(rng).or(sub(rng)),
        4 => sub(rng).and(sub(rng)),
        5 => sub(rng).seq(sub(rng)),
        6 => sub(rng).contig_seq(sub(rng)),
        7 => sub(rng).plus(),
        8 => sub(rng).contig_plus(),
        9 => {
            let f = sub(rng);
            let keep: VarSet = f.variables().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
            f.project(keep)
        }
        10 => sub(rng).within(random_interval(rng)),
        11 => sub(rng).timed_seq(random_interval(rng), sub(rng)),
        12 => sub(rng).timed_contig_seq(random_interval(rng), sub(rng)),
        13 => sub(rng).timed_iter(random_interval(rng)),
        _ => sub(rng).timed_contig_iter(random_interval(rng)),
    }
}

/// `n` events with gaps `k/d`, `k ∈ 1..=4`, `d ∈ {1, 2, 4}`.
pub fn random_stream<R: Rng>(rng: &mut R, n: usize) -> TimedStream {
    let mut s = TimedStream::new();
    let mut t = Rational::ZERO;
    for _ in 0..n {
        let d = *[1, 2, 4].choose(rng).expect("non-empty");
        t = t + Rational::new(rng.gen_range(1..=4), d);
        let e = Event::new(*TYPES.choose(rng).expect("non-empty")).with("v", Value::Int(rng.gen_range(0..5)));
        s.push(e, t).expect("increasing");
    }
    s
}

fn label_of(bits: u8) -> VarSet {
    VARS.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, x)| x.to_string()).collect()
}

/// A deterministic automaton with one clock `z` whose guards are all
/// `z ≤ c` (or all `z ≥ c` for [`Monotonicity::Ge`]) or `true`.
///
/// Determinism comes from the predicates: each state splits each event type
/// into at most two disjoint ranges of `v`, and transitions sharing a range
/// carry distinct labels.
pub fn random_monotonic_automaton<R: Rng>(rng: &mut R, mode: Monotonicity) -> TimedCea {
    let cmp = if mode == Monotonicity::Ge { Cmp::Ge } else { Cmp::Le };
    let mut a = TimedCea::new();
    let n = rng.gen_range(2..=5);
    for _ in 1..n {
        a.add_state();
    }
    a.add_clock("z");
    for q in 0..n {
        for ty in TYPES {
            let pieces: Vec<Predicate> = if rng.gen_bool(0.5) {
                let s = rng.gen_range(1..5);
                vec![
                    Predicate::and(Predicate::type_is(ty), Predicate::basic("v", Cmp::Lt, Value::Int(s))),
                    Predicate::and(Predicate::type_is(ty), Predicate::basic("v", Cmp::Ge, Value::Int(s))),
                ]
            } else {
                vec![Predicate::type_is(ty)]
            };
            for pred in pieces {
                let mut labels: Vec<u8> = vec![0, 1, 2, 3];
                labels.shuffle(rng);
                let count = *[0, 1, 1, 2].choose(rng).expect("non-empty");
                for &bits in &labels[..count] {
                    let guard = if rng.gen_bool(0.5) {
                        ClockCondition::True
                    } else {
                        ClockCondition::atom(0, cmp, small_constant(rng))
                    };
                    let to = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..n) };
                    a.add_transition(Transition {
                        from: q,
                        pred: pred.clone(),
                        guard,
                        label: label_of(bits),
                        resets: if rng.gen_bool(0.4) { [0].into() } else { Default::default() },
                        to,
                    });
                }
            }
        }
    }
    for q in 1..n {
        if rng.gen_bool(0.4) {
            a.finals.insert(q);
        }
    }
    if a.finals.is_empty() {
        a.finals.insert(rng.gen_range(1..n));
    }
    a.vars = VARS.iter().map(|x| x.to_string()).collect();
    a
}

fn random_guard<R: Rng>(rng: &mut R, clocks: usize) -> ClockCondition {
    if clocks == 0 || rng.gen_bool(0.35) {
        return ClockCondition::True;
    }
    let cmps = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];
    let atom = |rng: &mut R| {
        let c = *[Rational::ZERO, Rational::new(1, 2), Rational::ONE, Rational::from_integer(2)]
            .choose(rng)
            .expect("non-empty");
        ClockCondition::atom(rng.gen_range(0..clocks), *cmps.choose(rng).expect("non-empty"), c)
    };
    let g = atom(rng);
    match rng.gen_range(0..4) {
        0 => ClockCondition::and(g, atom(rng)),
        1 => ClockCondition::or(g, atom(rng)),
        _ => g,
    }
}

/// An automaton with at most four states and two clocks whose resets are a
/// function of the label, hence synchronous. Guards are arbitrary.
pub fn random_sync_automaton<R: Rng>(rng: &mut R) -> TimedCea {
    let mut a = TimedCea::new();
    let n = rng.gen_range(2..=4);
    for _ in 1..n {
        a.add_state();
    }
    let clocks = rng.gen_range(1..=2);
    for z in 0..clocks {
        a.add_clock(format!("z{}", z + 1));
    }
    let resets: Vec<Vec<usize>> =
        (0..4).map(|_| (0..clocks).filter(|_| rng.gen_bool(0.5)).collect()).collect();
    let preds = || {
        vec![
            Predicate::True,
            Predicate::type_is("A"),
            Predicate::type_is("B"),
            Predicate::basic("v", Cmp::Lt, Value::Int(2)),
        ]
    };
    let count = rng.gen_range(n..=2 * n + 1);
    for k in 0..count {
        let from = if k == 0 { 0 } else { rng.gen_range(0..n) };
        let bits = rng.gen_range(0..3u8);
        a.add_transition(Transition {
            from,
            pred: preds().choose(rng).expect("non-empty").clone(),
            guard: random_guard(rng, clocks),
            label: label_of(bits),
            resets: resets[bits as usize].iter().copied().collect(),
            to: rng.gen_range(1..n),
        });
    }
    a.finals.insert(rng.gen_range(1..n));
    a.vars = VARS.iter().map(|x| x.to_string()).collect();
    a
}

/// An automaton whose resets are not synchronous: after a seeded prefix of
/// silent steps, two transitions with the same label reset different clocks.
/// Their guards overlap only on a narrow time window relative to the start
/// of the run.
pub fn conflicting_automaton<R: Rng>(rng: &mut R) -> TimedCea {
    let mut a = TimedCea::new();
    let prefix = rng.gen_range(0..=3);
    let q0 = a.initial;
    a.add_clock("z1");
    a.add_clock("z2");
    let start = a.add_state();
    a.add_transition(Transition {
        from: q0,
        pred: Predicate::type_is("A"),
        guard: ClockCondition::True,
        label: label_of(1),
        resets: [0, 1].into(),
        to: start,
    });
    let mut at = start;
    for _ in 0..prefix {
        let next = a.add_state();
        a.add_transition(Transition {
            from: at,
            pred: Predicate::True,
            guard: random_guard(rng, 0),
            label: VarSet::new(),
            resets: [0].into(),
            to: next,
        });
        at = next;
    }
    // Branches overlap exactly when z2 (never reset after the start) is c.
    let c = Rational::from_integer(rng.gen_range(1..=3)) + Rational::new(rng.gen_range(0..2), 2);
    let (l, r) = (a.add_state(), a.add_state());
    for (cmp, resets, to) in [(Cmp::Le, [0].into(), l), (Cmp::Ge, [1].into(), r)] {
        a.add_transition(Transition {
            from: at,
            pred: Predicate::type_is("B"),
            guard: ClockCondition::atom(1, cmp, c),
            label: label_of(2),
            resets,
            to,
        });
    }
    a.finals.extend([l, r]);
    a.vars = VARS.iter().map(|x| x.to_string()).collect();
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cea::{is_deterministic, is_monotonic};

    #[test]
    fn monotonic_automata_are_deterministic_and_monotonic() {
        for seed in 0..50 {
            let mut r = rng(seed);
            for mode in [Monotonicity::Le, Monotonicity::Ge] {
                let a = random_monotonic_automaton(&mut r, mode);
                a.validate().unwrap();
                assert!(is_deterministic(&a), "seed {seed}");
                assert_ne!(is_monotonic(&a), Monotonicity::No);
            }
        }
    }

    #[test]
    fn streams_increase() {
        let s = random_stream(&mut rng(7), 30);
        assert_eq!(s.len(), 30);
        assert!(s.items().windows(2).all(|w| w[0].1 < w[1].1));
    }

    #[test]
    fn formulas_respect_depth_and_reach_every_operator() {
        let mut r = rng(3);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..400 {
            let f = random_formula(&mut r, 4);
            assert!(f.depth() <= 4);
            f.walk(&mut |g| {
                seen.insert(g.operator_name());
            });
        }
        assert_eq!(seen.len(), 15, "{seen:?}");
    }
}
