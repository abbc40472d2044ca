//! Brute-force run enumeration: the reference semantics of timed CEA.

use std::collections::{BTreeMap, BTreeSet};

use super::{guard_sat, ClockValuation, State, TimedCea};
use crate::cel::{OracleConfig, OracleError};
use crate::model::{ComplexEvent, TimedStream};
use crate::rational::Rational;

type Set = BTreeSet<ComplexEvent>;

/// `⟦T⟧(S)` with the default configuration.
pub fn eval_cea_oracle(a: &TimedCea, s: &TimedStream) -> Result<Set, OracleError> {
    eval_cea_oracle_with(a, s, &OracleConfig::default())
}

/// `⟦T⟧_j(S)`: the outputs ending at position `j`.
pub fn eval_cea_at(a: &TimedCea, s: &TimedStream, j: usize) -> Result<Set, OracleError> {
    Ok(eval_cea_oracle(a, s)?.into_iter().filter(|c| c.end == j).collect())
}

/// Explores every run from every start position. Configurations are
/// `(state, valuation)` with exact rational clock values, so runs that reach
/// the same configuration with the same marks are merged.
pub fn eval_cea_oracle_with(
    a: &TimedCea,
    s: &TimedStream,
    cfg: &OracleConfig,
) -> Result<Set, OracleError> {
    if s.len() > cfg.stream_cap {
        return Err(OracleError::StreamTooLong { len: s.len(), cap: cfg.stream_cap });
    }
    let out_edges = a.outgoing();
    let mut out = Set::new();
    for i in 1..=s.len() {
        // (state, valuation) -> partial complex events (marks so far)
        let mut frontier: BTreeMap<(State, ClockValuation), BTreeSet<ComplexEvent>> =
            BTreeMap::new();
        frontier
            .entry((a.initial, ClockValuation::empty(a.num_clocks())))
            .or_default()
            .insert(ComplexEvent::new(i, i));
        for k in i..=s.len() {
            let (event, t) = &s.items()[k - 1];
            let prev = if k == 1 { Rational::ZERO } else { s.ts(k - 1) };
            let dt = *t - prev;
            let mut next: BTreeMap<(State, ClockValuation), BTreeSet<ComplexEvent>> =
                BTreeMap::new();
            let mut count = 0usize;
            for ((q, nu), partials) in &frontier {
                let moved = nu.advance(dt);
                for &e in &out_edges[*q] {
                    let tr = &a.transitions[e];
                    if !tr.pred.sat(event) || !guard_sat(&moved, &tr.guard) {
                        continue;
                    }
                    let target = next.entry((tr.to, moved.reset(&tr.resets))).or_default();
                    for c in partials {
                        let mut c = c.clone();
                        c.end = k;
                        for x in &tr.label {
                            c.bind(x, k);
                        }
                        if target.insert(c) {
                            count += 1;
                        }
                    }
                }
            }
            if count > cfg.max_results {
                return Err(OracleError::TooManyResults { limit: cfg.max_results });
            }
            for ((q, _), partials) in &next {
                if a.is_final(*q) {
                    out.extend(partials.iter().cloned());
                }
            }
            if out.len() > cfg.max_results {
                return Err(OracleError::TooManyResults { limit: cfg.max_results });
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
    Ok(out)
}
