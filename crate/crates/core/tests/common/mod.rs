//! Helpers shared by the integration tests.
#![allow(dead_code)]

use tcer_core::cea::{guard_sat, ClockValuation};
use tcer_core::determinize::SyncWitness;
use tcer_core::predicate::satisfiable_literals;
use tcer_core::{Rational, TimedCea};

/// Replays both runs of a witness with concrete clock values and checks that
/// they start at the initial state, are connected, agree on labels, can read
/// a common event at every step, satisfy every guard, and disagree on the
/// resets of the last step.
pub fn witness_is_valid(a: &TimedCea, w: &SyncWitness) -> bool {
    let n = w.first.len();
    if n == 0 || w.second.len() != n || w.delays.len() != n {
        return false;
    }
    let start = (a.initial, ClockValuation::empty(a.num_clocks()));
    let mut runs = [start.clone(), start];
    for step in 0..n {
        let ks = [w.first[step], w.second[step]];
        if w.delays[step] <= Rational::ZERO {
            return false;
        }
        let (t1, t2) = (&a.transitions[ks[0]], &a.transitions[ks[1]]);
        if t1.label != t2.label || !satisfiable_literals(&[(&t1.pred, true), (&t2.pred, true)]) {
            return false;
        }
        for (run, &k) in runs.iter_mut().zip(&ks) {
            let t = &a.transitions[k];
            let moved = run.1.advance(w.delays[step]);
            if t.from != run.0 || !guard_sat(&moved, &t.guard) {
                return false;
            }
            *run = (t.to, moved.reset(&t.resets));
        }
        if step + 1 == n && t1.resets == t2.resets {
            return false;
        }
    }
    true
}
