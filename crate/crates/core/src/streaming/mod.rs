//! Streaming evaluation of deterministic, monotonic, single-clock automata.
//!
//! For every state the evaluator keeps a short *union-list* of nodes in a
//! clock-aware compact set ([`caecs`]), sorted by decreasing maximum rank.
//! Each event costs a constant amount of work (for a fixed automaton), and
//! the matches ending at the current position can be enumerated with delay
//! linear in the size of each match.
//!
//! Before the clock is first reset it is undefined and fails every guard.
//! The evaluator tracks this by splitting each state into an "unset" and a
//! "set" copy; only the set copy follows guarded transitions.

pub mod caecs;
mod ulist;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::cel::{classify, CelFormula};
use crate::compiler::{compile, compile_windowed, simplify, CompileError};
use crate::determinize::{determinize, DeterminizeError};
use crate::cea::{is_deterministic, is_monotonic, CeaError, Monotonicity, TimedCea};
use crate::model::{ComplexEvent, Event, NonIncreasingTimestamp, TimedStream, VarSet};
use crate::predicate::{Cmp, Predicate};
use crate::rational::Rational;
pub use caecs::{merge_gadgets, Arena, Direction, Gadget, Kind, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Invalid(#[from] CeaError),
    #[error("the automaton is not deterministic (transitions {0} and {1} overlap)")]
    NotDeterministic(usize, usize),
    #[error("guards mix `<=` and `>=` or use other comparators")]
    NotMonotonic,
    #[error("guards check {0} clocks; at most one is supported")]
    TooManyClocks(usize),
}

#[derive(Debug, Clone)]
struct Step {
    /// Index into the evaluator's predicate table.
    pred: usize,
    check: Option<Rational>,
    label: Option<u32>,
    reset: bool,
    to: usize,
}

/// Resource counters; `max_list_len` and `max_odepth` are the quantities
/// the constant-time argument bounds.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Stats {
    pub events: usize,
    pub nodes: usize,
    pub max_list_len: usize,
    pub max_odepth: u8,
}

/// Incremental evaluator; feed events with [`Evaluator::push`] and read the
/// matches ending at the latest event with [`Evaluator::for_each_output`].
#[derive(Debug)]
pub struct Evaluator {
    arena: Arena,
    dir: Direction,
    steps: Vec<Vec<Step>>,
    finals: Vec<bool>,
    initial: usize,
    preds: Vec<Predicate>,
    sat: Vec<Option<bool>>,
    labels: Vec<VarSet>,
    table: ulist::Table,
    next: ulist::Table,
    list_bound: usize,
    pos: usize,
    last_ts: Option<Rational>,
    stats: Stats,
}

impl Evaluator {
    pub fn new(a: &TimedCea) -> Result<Evaluator, LoadError> {
        a.validate()?;
        let checked = a.checked_clocks();
        if checked.len() > 1 {
            return Err(LoadError::TooManyClocks(checked.len()));
        }
        if let Some(&(i, j)) = crate::cea::deterministic_violations(a).first() {
            return Err(LoadError::NotDeterministic(i, j));
        }
        debug_assert!(is_deterministic(a));
        let (dir, cmp) = match is_monotonic(a) {
            Monotonicity::Le => (Direction::Le, Cmp::Le),
            Monotonicity::Ge => (Direction::Ge, Cmp::Ge),
            Monotonicity::No => return Err(LoadError::NotMonotonic),
        };
        let clock = checked.first().copied();

        // Collapse each guard to one bound; drop unsatisfiable ones.
        let bound = |g: &crate::cea::ClockCondition| -> Option<Option<Rational>> {
            let cs = g.atoms().into_iter().map(|(_, _, c)| c);
            let c = if cmp == Cmp::Le { cs.min() } else { cs.max() };
            match c {
                Some(c) if cmp == Cmp::Le && c.is_negative() => None,
                c => Some(c),
            }
        };

        let mut labels: Vec<VarSet> = Vec::new();
        let mut label_ids: HashMap<VarSet, u32> = HashMap::new();
        let mut preds: Vec<Predicate> = Vec::new();
        let mut pred_ids: HashMap<Predicate, usize> = HashMap::new();
        let out = a.outgoing();

        // Product with a one-bit "clock is set" flag, built on reachable pairs.
        let mut index: HashMap<(usize, bool), usize> = HashMap::from([((a.initial, false), 0)]);
        let mut pairs = vec![(a.initial, false)];
        let mut steps: Vec<Vec<Step>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            let (q, set) = pairs[p];
            let mut here = Vec::new();
            for &k in &out[q] {
                let t = &a.transitions[k];
                let Some(check) = bound(&t.guard) else { continue };
                if check.is_some() && !set {
                    continue;
                }
                let reset = clock.is_some_and(|z| t.resets.contains(&z));
                let key = (t.to, clock.is_some() && (set || reset));
                let to = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    queue.push_back(pairs.len() - 1);
                    pairs.len() - 1
                });
                let label = (!t.label.is_empty()).then(|| {
                    *label_ids.entry(t.label.clone()).or_insert_with(|| {
                        labels.push(t.label.clone());
                        (labels.len() - 1) as u32
                    })
                });
                let pred = *pred_ids.entry(t.pred.clone()).or_insert_with(|| {
                    preds.push(t.pred.clone());
                    preds.len() - 1
                });
                here.push(Step { pred, check, label, reset, to });
            }
            steps.push(here);
        }
        let n = pairs.len();
        Ok(Evaluator {
            arena: Arena::new(dir),
            dir,
            steps,
            finals: pairs.iter().map(|&(q, _)| a.is_final(q)).collect(),
            initial: 0,
            sat: vec![None; preds.len()],
            preds,
            labels,
            table: ulist::Table::new(n),
            next: ulist::Table::new(n),
            list_bound: a.num_states + 2,
            pos: 0,
            last_ts: None,
            stats: Stats::default(),
        })
    }

    pub fn direction(&self) -> Direction {
        self.dir
    }

    /// Position of the latest event (0 before any).
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn stats(&self) -> Stats {
        Stats { nodes: self.arena.len(), max_odepth: self.arena.max_odepth, ..self.stats }
    }

    /// Processes the next event.
    pub fn push(&mut self, e: &Event, t: Rational) -> Result<(), NonIncreasingTimestamp> {
        if let Some(prev) = self.last_ts {
            if t <= prev {
                return Err(NonIncreasingTimestamp { position: self.pos + 1, previous: prev, current: t });
            }
        }
        self.last_ts = Some(t);
        self.pos += 1;
        self.stats.events += 1;
        let j = self.pos;
        self.sat.iter_mut().for_each(|s| *s = None);

        let bottom = self.arena.new_bottom(j, t);
        let fresh = [bottom];
        self.next.clear();
        let mut keys: Vec<usize> = self.table.keys().to_vec();
        keys.sort_by(|&p, &q| {
            let (rp, rq) = (self.arena.max_rank(self.table.get(p)[0]), self.arena.max_rank(self.table.get(q)[0]));
            rq.cmp(&rp).then(p.cmp(&q))
        });

        // Sources are processed by decreasing rank of what they produce, so
        // a list's head never loses its place: resets and new runs carry the
        // current time, which is the largest rank for `≤` guards and the
        // smallest for `≥` guards.
        let fresh_first = self.dir == Direction::Le;
        if fresh_first {
            self.exec(None, &fresh, true, e, t, j);
            for &p in &keys {
                self.exec(Some(p), &[], true, e, t, j);
            }
            self.exec(None, &fresh, false, e, t, j);
            for &p in &keys {
                self.exec(Some(p), &[], false, e, t, j);
            }
        } else {
            for &p in &keys {
                self.exec(Some(p), &[], false, e, t, j);
            }
            self.exec(None, &fresh, false, e, t, j);
            self.exec(None, &fresh, true, e, t, j);
            for &p in &keys {
                self.exec(Some(p), &[], true, e, t, j);
            }
        }
        std::mem::swap(&mut self.table, &mut self.next);

        let longest = self.table.keys().iter().map(|&k| self.table.get(k).len()).max().unwrap_or(0);
        // Only `≤` guards keep lists short: with `≥` guards new resets rank
        // lowest, so they queue behind every older entry.
        debug_assert!(
            self.dir == Direction::Ge || longest <= self.list_bound,
            "union-list of length {longest}"
        );
        self.stats.max_list_len = self.stats.max_list_len.max(longest);
        Ok(())
    }

    fn holds(&mut self, pred: usize, e: &Event) -> bool {
        *self.sat[pred].get_or_insert_with(|| self.preds[pred].sat(e))
    }

    /// Fires the transitions of one source (with or without reset).
    fn exec(&mut self, src: Option<usize>, fresh: &[NodeId], resets: bool, e: &Event, t: Rational, j: usize) {
        let state = src.unwrap_or(self.initial);
        let list: Vec<NodeId> = match src {
            Some(p) => self.table.get(p).to_vec(),
            None => fresh.to_vec(),
        };
        let mut merged: Option<NodeId> = None;
        for k in 0..self.steps[state].len() {
            let (pred, check, label, reset, to) = {
                let s = &self.steps[state][k];
                (s.pred, s.check, s.label, s.reset, s.to)
            };
            if reset != resets || !self.holds(pred, e) {
                continue;
            }
            let arena = &mut self.arena;
            if let Some(label) = label {
                let base = *merged.get_or_insert_with(|| arena.merge(&list));
                let mut n = arena.extend(base, j, label);
                if let Some(c) = check {
                    n = arena.add_clock_check(n, t, c);
                    if arena.is_empty_node(n) {
                        continue;
                    }
                }
                if reset {
                    n = arena.add_reset(n, t);
                }
                ulist::add(arena, &mut self.next, to, vec![n]);
            } else {
                let mut ul = list.clone();
                if let Some(c) = check {
                    ulist::clock_check(arena, &mut ul, t, c);
                    if ul.is_empty() {
                        continue;
                    }
                }
                if reset {
                    ulist::reset(arena, &mut ul, t);
                }
                ulist::add(arena, &mut self.next, to, ul);
            }
        }
    }

    /// Calls `sink` on each match ending at the latest event, together with
    /// the number of nodes visited since the previous match.
    pub fn for_each_output_traced(&self, mut sink: impl FnMut(ComplexEvent, usize)) {
        let mut path: Vec<(usize, u32)> = Vec::new();
        let mut stack: Vec<(NodeId, Option<Rational>, usize)> = Vec::new();
        let mut visited = 0usize;
        for &p in self.table.keys() {
            if !self.finals[p] {
                continue;
            }
            for &root in self.table.get(p).iter().rev() {
                stack.push((root, None, 0));
            }
            while let Some((n, low, depth)) = stack.pop() {
                visited += 1;
                path.truncate(depth);
                match self.arena.get(n).kind {
                    Kind::Bottom { pos, .. } => {
                        let mut c = ComplexEvent::new(pos, self.pos);
                        for &(i, label) in &path {
                            for x in &self.labels[label as usize] {
                                c.bind(x, i);
                            }
                        }
                        sink(c, visited);
                        visited = 0;
                    }
                    Kind::Extended { pos, label, left } => {
                        path.push((pos, label));
                        stack.push((left, low, depth + 1));
                    }
                    Kind::Union { left, right } => {
                        if low.is_none_or(|l| self.arena.max_rank(right) >= l) {
                            stack.push((right, low, depth));
                        }
                        stack.push((left, low, depth));
                    }
                    Kind::Reset { left, .. } => stack.push((left, None, depth)),
                    Kind::ClockCheck { t0, c, left } => {
                        let thr = self.dir.threshold(t0, c);
                        stack.push((left, Some(low.map_or(thr, |l| l.max(thr))), depth));
                    }
                    Kind::Empty { .. } => unreachable!("empty nodes are never stored"),
                }
            }
        }
    }

    pub fn for_each_output(&self, mut sink: impl FnMut(ComplexEvent)) {
        self.for_each_output_traced(|c, _| sink(c));
    }

    pub fn outputs(&self) -> BTreeSet<ComplexEvent> {
        let mut out = BTreeSet::new();
        self.for_each_output(|c| {
            out.insert(c);
        });
        out
    }
}

#[derive(Debug, Error)]
pub enum PrepareError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Determinize(#[from] DeterminizeError),
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Compiles a query into an automaton the evaluator accepts: the two-clock
/// construction when the query allows it, else the general one; each is
/// simplified and determinized if needed. Reports the last failure.
pub fn streamable(phi: &CelFormula) -> Result<TimedCea, PrepareError> {
    let mut candidates = Vec::new();
    if classify(phi).windowed {
        candidates.push(compile_windowed(phi));
    }
    candidates.push(Ok(compile(phi)));
    let mut last = None;
    for a in candidates {
        let attempt = a.map_err(PrepareError::from).and_then(|a| {
            let a = simplify(&a);
            let d = if is_deterministic(&a) { a } else { simplify(&determinize(&a)?) };
            Evaluator::new(&d)?;
            Ok(d)
        });
        match attempt {
            Ok(d) => return Ok(d),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one candidate"))
}

/// All matches over a finite stream, by end position.
pub fn evaluate(a: &TimedCea, s: &TimedStream) -> Result<Vec<BTreeSet<ComplexEvent>>, LoadError> {
    let mut ev = Evaluator::new(a)?;
    Ok(s.iter()
        .map(|(e, t)| {
            ev.push(e, *t).expect("streams have increasing timestamps");
            ev.outputs()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cea::eval_cea_at;
    use crate::samples::{hot_then_dry_automaton, sensor_stream, two_pairs_automaton};

    #[test]
    fn hot_then_dry_matches_oracle() {
        let a = crate::determinize::determinize(&hot_then_dry_automaton()).unwrap();
        let s = sensor_stream();
        let got = evaluate(&a, &s).unwrap();
        for j in 1..=s.len() {
            assert_eq!(got[j - 1], eval_cea_at(&a, &s, j).unwrap(), "position {j}");
        }
    }

    #[test]
    fn rejects_two_clocks() {
        assert!(matches!(Evaluator::new(&two_pairs_automaton()), Err(LoadError::TooManyClocks(2))));
    }
}
