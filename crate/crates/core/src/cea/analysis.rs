//! Structural classifiers: determinism and monotonicity.

use serde::Serialize;

use super::TimedCea;
use crate::cea::ClockCondition;
use crate::predicate::{satisfiable_literals, Cmp};

/// Pairs of transition indices from a common state that carry the same
/// label and can fire together on some event and valuation.
pub fn deterministic_violations(a: &TimedCea) -> Vec<(usize, usize)> {
    let out = a.outgoing();
    let mut bad = Vec::new();
    for ks in &out {
        for (x, &k1) in ks.iter().enumerate() {
            for &k2 in &ks[x + 1..] {
                let (t1, t2) = (&a.transitions[k1], &a.transitions[k2]);
                if t1.label == t2.label
                    && satisfiable_literals(&[(&t1.pred, true), (&t2.pred, true)])
                    && ClockCondition::and(t1.guard.clone(), t2.guard.clone()).satisfiable()
                {
                    bad.push((k1, k2));
                }
            }
        }
    }
    bad
}

/// No two transitions leaving one state with equal labels can fire on the
/// same event under the same valuation.
pub fn is_deterministic(a: &TimedCea) -> bool {
    deterministic_violations(a).is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    /// Every guard is a conjunction of `z ≤ c`.
    Le,
    /// Every guard is a conjunction of `z ≥ c`.
    Ge,
    No,
}

/// Automata whose guards are all `true` report [`Monotonicity::Le`].
pub fn is_monotonic(a: &TimedCea) -> Monotonicity {
    let guards = || a.transitions.iter().map(|t| &t.guard);
    if guards().all(|g| g.is_conjunction_of(Cmp::Le)) {
        Monotonicity::Le
    } else if guards().all(|g| g.is_conjunction_of(Cmp::Ge)) {
        Monotonicity::Ge
    } else {
        Monotonicity::No
    }
}
