//! Subset construction for timed CEA with synchronous resets.
//!
//! Deterministic states are pairs `(D, I)`: the set of states reachable by
//! runs sharing one label sequence, and the clocks those runs have
//! initialized. Because resets are a function of the label, every run in `D`
//! carries the same valuation, so a transition of the result is a *cell*:
//! a predicate type over the predicates leaving `D`, a guard type over the
//! guards leaving `D`, and a label. Its target collects every state reached
//! by a transition matching the cell.
//!
//! Cells that can never lead to an output are dropped using a region
//! abstraction of the input, and cells differing only in their guard type
//! are merged into one transition with a canonical guard.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::guards::{guard_types, predicate_of_type, predicate_types, simplify_union};
use super::region::{Region, RegionSpace};
use crate::cea::{Atom, CeaError, Clock, ClockCondition, State, TimedCea, Transition};
use crate::model::VarSet;
use crate::predicate::{satisfiable, Predicate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeterminizeError {
    #[error(
        "resets are not synchronous: transitions {0} and {1} carry the same label on the same \
         event but reset different clocks"
    )]
    NotSynchronous(usize, usize),
    #[error(transparent)]
    Invalid(#[from] CeaError),
}

#[derive(Debug, Clone)]
pub struct DeterminizeOptions {
    /// Drop cells that cannot lead to an output.
    pub prune: bool,
    /// Give up pruning once a region exploration exceeds this many nodes.
    pub region_cap: usize,
}

impl Default for DeterminizeOptions {
    fn default() -> Self {
        DeterminizeOptions { prune: true, region_cap: 200_000 }
    }
}

/// `2^{|Q| + 2|Δ|} · |T| + 2^{|Q|}`, saturating.
pub fn size_bound(a: &TimedCea) -> u128 {
    let pow = |e: usize| if e >= 127 { u128::MAX } else { 1u128 << e };
    pow(a.num_states + 2 * a.transitions.len())
        .saturating_mul(a.size() as u128)
        .saturating_add(pow(a.num_states))
}

pub fn determinize(a: &TimedCea) -> Result<TimedCea, DeterminizeError> {
    determinize_with(a, &DeterminizeOptions::default())
}

type DetState = (BTreeSet<State>, BTreeSet<Clock>);

struct Cell {
    src: usize,
    pred: Predicate,
    alpha: Vec<Vec<Atom>>,
    alpha_guard: ClockCondition,
    label: VarSet,
    /// `(resets, target)`, or two conflicting transitions.
    outcome: Result<(BTreeSet<Clock>, usize), (usize, usize)>,
}

pub fn determinize_with(
    a: &TimedCea,
    opts: &DeterminizeOptions,
) -> Result<TimedCea, DeterminizeError> {
    a.validate()?;
    let out_edges = a.outgoing();
    let pred_ok: Vec<bool> = a.transitions.iter().map(|t| satisfiable(&t.pred)).collect();

    let mut states: Vec<DetState> = Vec::new();
    let mut index: HashMap<DetState, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let init: DetState = ([a.initial].into(), BTreeSet::new());
    index.insert(init.clone(), 0);
    states.push(init);
    queue.push_back(0);
    let mut cells: Vec<Cell> = Vec::new();

    while let Some(d) = queue.pop_front() {
        let (dset, init_clocks) = states[d].clone();
        let live: Vec<usize> = dset
            .iter()
            .flat_map(|&q| out_edges[q].iter().copied())
            .filter(|&k| pred_ok[k] && a.transitions[k].guard.clocks().is_subset(&init_clocks))
            .collect();
        let mut preds: Vec<&Predicate> = Vec::new();
        let mut guards: Vec<&ClockCondition> = Vec::new();
        for &k in &live {
            let t = &a.transitions[k];
            if !preds.contains(&&t.pred) {
                preds.push(&t.pred);
            }
            if !t.guard.is_true() && !guards.contains(&&t.guard) {
                guards.push(&t.guard);
            }
        }
        let gtypes = guard_types(&guards);
        for ps in predicate_types(&preds) {
            let by_pred: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&k| {
                    let i = preds.iter().position(|p| **p == a.transitions[k].pred).unwrap();
                    ps[i]
                })
                .collect();
            if by_pred.is_empty() {
                continue;
            }
            let pred = predicate_of_type(&preds, &ps);
            for (gs, alpha) in &gtypes {
                let matching = by_pred.iter().copied().filter(|&k| {
                    let g = &a.transitions[k].guard;
                    g.is_true() || gs[guards.iter().position(|x| *x == g).unwrap()]
                });
                // label -> (targets, first transition with its resets, conflict)
                let mut groups: Vec<(VarSet, BTreeSet<State>, usize, Option<usize>)> = Vec::new();
                for k in matching {
                    let t = &a.transitions[k];
                    match groups.iter_mut().find(|g| g.0 == t.label) {
                        Some(g) => {
                            g.1.insert(t.to);
                            if g.3.is_none() && a.transitions[g.2].resets != t.resets {
                                g.3 = Some(k);
                            }
                        }
                        None => groups.push((t.label.clone(), [t.to].into(), k, None)),
                    }
                }
                let alpha_guard = ClockCondition::any(
                    alpha.iter().map(|c| {
                        ClockCondition::all(c.iter().map(|&(z, cmp, v)| ClockCondition::atom(z, cmp, v)))
                    }),
                );
                for (label, targets, first, conflict) in groups {
                    let outcome = match conflict {
                        Some(other) => Err((first, other)),
                        None => {
                            let resets = a.transitions[first].resets.clone();
                            let key: DetState =
                                (targets, init_clocks.union(&resets).copied().collect());
                            let dst = match index.get(&key) {
                                Some(&i) => i,
                                None => {
                                    let i = states.len();
                                    index.insert(key.clone(), i);
                                    states.push(key);
                                    queue.push_back(i);
                                    i
                                }
                            };
                            Ok((resets, dst))
                        }
                    };
                    cells.push(Cell {
                        src: d,
                        pred: pred.clone(),
                        alpha: alpha.clone(),
                        alpha_guard: alpha_guard.clone(),
                        label,
                        outcome,
                    });
                }
            }
        }
    }

    let used = match opts.prune.then(|| prune(a, &states, &cells, opts.region_cap)).flatten() {
        Some(used) => used?,
        None => {
            if let Some(Err(pair)) = cells.iter().map(|c| c.outcome.clone()).find(Result::is_err) {
                return Err(DeterminizeError::NotSynchronous(pair.0, pair.1));
            }
            vec![true; cells.len()]
        }
    };

    // Merge cells that differ only in their guard type.
    type Key = (usize, Predicate, VarSet, BTreeSet<Clock>, usize);
    let mut merged: Vec<(Key, Vec<Vec<Atom>>)> = Vec::new();
    let mut merged_index: HashMap<Key, usize> = HashMap::new();
    for (c, _) in cells.iter().zip(&used).filter(|(_, &u)| u) {
        let Ok((resets, dst)) = &c.outcome else { unreachable!("conflicts were reported") };
        let key = (c.src, c.pred.clone(), c.label.clone(), resets.clone(), *dst);
        match merged_index.get(&key) {
            Some(&i) => merged[i].1.extend(c.alpha.iter().cloned()),
            None => {
                merged_index.insert(key.clone(), merged.len());
                merged.push((key, c.alpha.clone()));
            }
        }
    }

    let mut out = TimedCea {
        num_states: states.len(),
        vars: a.vars.clone(),
        clocks: a.clocks.clone(),
        transitions: Vec::new(),
        initial: 0,
        finals: (0..states.len()).filter(|&d| states[d].0.iter().any(|&q| a.is_final(q))).collect(),
    };
    for ((src, pred, label, resets, dst), alpha) in merged {
        out.transitions.push(Transition {
            from: src,
            pred,
            guard: simplify_union(&alpha),
            label,
            resets,
            to: dst,
        });
    }
    Ok(out.trim())
}

/// Marks cells that fire from a reachable configuration into one from which
/// some output is still possible. `None` when the exploration exceeds `cap`.
fn prune(
    a: &TimedCea,
    states: &[DetState],
    cells: &[Cell],
    cap: usize,
) -> Option<Result<Vec<bool>, DeterminizeError>> {
    let space = RegionSpace::for_automaton(a);
    let live = liveness(a, &space, cap)?;
    let mut by_src: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (i, c) in cells.iter().enumerate() {
        by_src[c.src].push(i);
    }
    let mut used = vec![false; cells.len()];
    let start = (0usize, space.empty());
    let mut seen: HashSet<(usize, Region)> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((d, r)) = queue.pop_front() {
        let succs = space.positive_successors(&r);
        for &ci in &by_src[d] {
            let c = &cells[ci];
            for rp in succs.iter().filter(|rp| space.satisfies(rp, &c.alpha_guard, 0)) {
                let (resets, dst) = match &c.outcome {
                    Err((k1, k2)) => return Some(Err(DeterminizeError::NotSynchronous(*k1, *k2))),
                    Ok(x) => x,
                };
                let next = space.reset(rp, resets.iter().copied());
                let alive =
                    states[*dst].0.iter().any(|&q| live.get(&(q, next.clone())).copied().unwrap_or(true));
                if !alive {
                    continue;
                }
                used[ci] = true;
                if seen.insert((*dst, next.clone())) {
                    if seen.len() > cap {
                        return None;
                    }
                    queue.push_back((*dst, next));
                }
            }
        }
    }
    Some(Ok(used))
}

/// For every reachable `(state, region)` of `a`, whether a final state is
/// still reachable from it.
fn liveness(a: &TimedCea, space: &RegionSpace, cap: usize) -> Option<HashMap<(State, Region), bool>> {
    let out_edges = a.outgoing();
    let pred_ok: Vec<bool> = a.transitions.iter().map(|t| satisfiable(&t.pred)).collect();
    let mut nodes: Vec<(State, Region)> = vec![(a.initial, space.empty())];
    let mut index: HashMap<(State, Region), usize> = HashMap::from([(nodes[0].clone(), 0)]);
    let mut preds_of: Vec<Vec<usize>> = vec![Vec::new()];
    let mut i = 0;
    while i < nodes.len() {
        let (q, r) = nodes[i].clone();
        for rp in space.positive_successors(&r) {
            for &k in &out_edges[q] {
                let t = &a.transitions[k];
                if !pred_ok[k] || !space.satisfies(&rp, &t.guard, 0) {
                    continue;
                }
                let node = (t.to, space.reset(&rp, t.resets.iter().copied()));
                let j = match index.get(&node) {
                    Some(&j) => j,
                    None => {
                        if nodes.len() >= cap {
                            return None;
                        }
                        index.insert(node.clone(), nodes.len());
                        nodes.push(node);
                        preds_of.push(Vec::new());
                        nodes.len() - 1
                    }
                };
                preds_of[j].push(i);
            }
        }
        i += 1;
    }
    let mut live = vec![false; nodes.len()];
    let mut stack: Vec<usize> = (0..nodes.len()).filter(|&j| a.is_final(nodes[j].0)).collect();
    for &j in &stack {
        live[j] = true;
    }
    while let Some(j) = stack.pop() {
        for &p in &preds_of[j] {
            if !live[p] {
                live[p] = true;
                stack.push(p);
            }
        }
    }
    Some(index.into_iter().map(|(node, j)| (node, live[j])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cea::{eval_cea_oracle, is_deterministic, is_monotonic, Monotonicity};
    use crate::samples::{hot_then_dry_automaton, sensor_stream, two_pairs_automaton};

    #[test]
    fn hot_then_dry_determinizes_to_a_monotonic_automaton() {
        let a = hot_then_dry_automaton();
        let d = determinize(&a).unwrap();
        assert!(is_deterministic(&d), "{}", d.to_dot());
        assert_eq!(is_monotonic(&d), Monotonicity::Le, "{}", d.to_dot());
        let s = sensor_stream();
        assert_eq!(eval_cea_oracle(&d, &s).unwrap(), eval_cea_oracle(&a, &s).unwrap());
        assert!((d.size() as u128) <= size_bound(&a));
    }

    #[test]
    fn two_pairs_determinizes() {
        let a = two_pairs_automaton();
        for prune in [true, false] {
            let d = determinize_with(&a, &DeterminizeOptions { prune, ..Default::default() }).unwrap();
            assert!(is_deterministic(&d));
            let s = sensor_stream();
            assert_eq!(eval_cea_oracle(&d, &s).unwrap(), eval_cea_oracle(&a, &s).unwrap());
        }
    }

    #[test]
    fn conflicting_resets_are_reported() {
        let mut a = hot_then_dry_automaton();
        let mut t = a.transitions[0].clone();
        t.resets.clear();
        a.add_transition(t);
        assert!(matches!(determinize(&a), Err(DeterminizeError::NotSynchronous(..))));
    }
}
