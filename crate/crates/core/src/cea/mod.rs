//! Timed complex event automata: clock conditions, transitions, runs, the
//! run-enumeration oracle and structural classifiers.

mod analysis;
mod clock;
mod oracle;

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Event, VarSet};
use crate::predicate::{Cmp, Predicate};
use crate::rational::Rational;

pub use analysis::{deterministic_violations, is_deterministic, is_monotonic, Monotonicity};
pub use clock::{conjunction_satisfiable, guard_sat, Atom, Clock, ClockCondition, ClockValuation};
pub(crate) use clock::clock_box;
pub use oracle::{eval_cea_at, eval_cea_oracle, eval_cea_oracle_with};

pub type State = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: State,
    pub pred: Predicate,
    pub guard: ClockCondition,
    pub label: VarSet,
    pub resets: BTreeSet<Clock>,
    pub to: State,
}

impl Transition {
    pub fn is_marking(&self) -> bool {
        !self.label.is_empty()
    }

    pub fn size(&self) -> usize {
        self.guard.size() + self.pred.size() + self.label.len() + self.resets.len()
    }
}

/// A timed CEA `(Q, X, Z, Δ, q0, F)`. States are `0..num_states`, clocks
/// are indices into `clocks`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedCea {
    pub num_states: usize,
    pub vars: VarSet,
    pub clocks: Vec<String>,
    pub transitions: Vec<Transition>,
    pub initial: State,
    pub finals: BTreeSet<State>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CeaError {
    #[error("transition {index} refers to state {state} outside 0..{num_states}")]
    BadState { index: usize, state: State, num_states: usize },
    #[error("transition {index} refers to clock {clock} outside 0..{num_clocks}")]
    BadClock { index: usize, clock: Clock, num_clocks: usize },
    #[error("transition {index} uses a clock comparator outside <, <=, =, >=, >")]
    BadComparator { index: usize },
    #[error("initial state {0} out of range")]
    BadInitial(State),
    #[error("final state {0} out of range")]
    BadFinal(State),
    #[error("transition {index} enters the initial state")]
    EntersInitial { index: usize },
    #[error("transition {index} checks clock {clock} which is not reset on every path to it")]
    UnresetClock { index: usize, clock: Clock },
}

impl TimedCea {
    /// An automaton with one (initial) state and no transitions.
    pub fn new() -> TimedCea {
        TimedCea {
            num_states: 1,
            vars: VarSet::new(),
            clocks: Vec::new(),
            transitions: Vec::new(),
            initial: 0,
            finals: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self) -> State {
        self.num_states += 1;
        self.num_states - 1
    }

    pub fn add_clock(&mut self, name: impl Into<String>) -> Clock {
        self.clocks.push(name.into());
        self.clocks.len() - 1
    }

    pub fn add_transition(&mut self, t: Transition) {
        self.vars.extend(t.label.iter().cloned());
        self.transitions.push(t);
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn is_final(&self, q: State) -> bool {
        self.finals.contains(&q)
    }

    /// Transition indices grouped by source state.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_states];
        for (k, t) in self.transitions.iter().enumerate() {
            out[t.from].push(k);
        }
        out
    }

    /// `|T| = |Q| + Σ (|γ| + |P| + |L| + |Z|)`.
    pub fn size(&self) -> usize {
        self.num_states + self.transitions.iter().map(Transition::size).sum::<usize>()
    }

    /// Successor configurations of `(q, ν)` on `event` after `dt` time units:
    /// every transition whose predicate accepts the event and whose guard
    /// holds on `ν + dt` yields `(target, reset_Z(ν + dt), L)`.
    pub fn step(
        &self,
        q: State,
        nu: &ClockValuation,
        event: &Event,
        dt: Rational,
    ) -> Vec<(State, ClockValuation, VarSet)> {
        let moved = nu.advance(dt);
        self.transitions
            .iter()
            .filter(|t| t.from == q && t.pred.sat(event) && guard_sat(&moved, &t.guard))
            .map(|t| (t.to, moved.reset(&t.resets), t.label.clone()))
            .collect()
    }

    /// Range and comparator checks.
    pub fn validate(&self) -> Result<(), CeaError> {
        if self.initial >= self.num_states {
            return Err(CeaError::BadInitial(self.initial));
        }
        if let Some(&f) = self.finals.iter().find(|&&f| f >= self.num_states) {
            return Err(CeaError::BadFinal(f));
        }
        for (index, t) in self.transitions.iter().enumerate() {
            for state in [t.from, t.to] {
                if state >= self.num_states {
                    return Err(CeaError::BadState { index, state, num_states: self.num_states });
                }
            }
            for clock in t.guard.clocks().into_iter().chain(t.resets.iter().copied()) {
                if clock >= self.clocks.len() {
                    return Err(CeaError::BadClock { index, clock, num_clocks: self.clocks.len() });
                }
            }
            if t.guard.atoms().iter().any(|a| a.1 == Cmp::Ne) {
                return Err(CeaError::BadComparator { index });
            }
        }
        Ok(())
    }

    /// The structural invariants the compiler maintains: nothing enters the
    /// initial state, and every clock is reset on every path before it is
    /// checked.
    pub fn check_structure(&self) -> Result<(), CeaError> {
        self.validate()?;
        if let Some(index) = self.transitions.iter().position(|t| t.to == self.initial) {
            return Err(CeaError::EntersInitial { index });
        }
        let must = self.must_reset();
        for (index, t) in self.transitions.iter().enumerate() {
            let Some(done) = &must[t.from] else { continue };
            if let Some(&clock) = t.guard.clocks().iter().find(|z| !done.contains(z)) {
                return Err(CeaError::UnresetClock { index, clock });
            }
        }
        Ok(())
    }

    /// For each state, the clocks reset on every path from the initial state
    /// (`None` for unreachable states).
    pub fn must_reset(&self) -> Vec<Option<BTreeSet<Clock>>> {
        let mut must: Vec<Option<BTreeSet<Clock>>> = vec![None; self.num_states];
        must[self.initial] = Some(BTreeSet::new());
        let out = self.outgoing();
        let mut queue: VecDeque<State> = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            let here = must[q].clone().expect("queued states are reached");
            for &k in &out[q] {
                let t = &self.transitions[k];
                let mut next = here.clone();
                next.extend(t.resets.iter().copied());
                let updated = match &must[t.to] {
                    None => Some(next),
                    Some(old) => {
                        let meet: BTreeSet<Clock> = old.intersection(&next).copied().collect();
                        (meet.len() < old.len()).then_some(meet)
                    }
                };
                if let Some(u) = updated {
                    must[t.to] = Some(u);
                    queue.push_back(t.to);
                }
            }
        }
        must
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let out = self.outgoing();
        let mut seen = vec![false; self.num_states];
        seen[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for &k in &out[q] {
                let to = self.transitions[k].to;
                if !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }

    /// States from which a final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        for &f in &self.finals {
            seen[f] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for t in &self.transitions {
                if seen[t.to] && !seen[t.from] {
                    seen[t.from] = true;
                    changed = true;
                }
            }
        }
        seen
    }

    /// Removes states that are unreachable or cannot reach a final state
    /// (the initial state is always kept), and transitions with an
    /// unsatisfiable guard. Unused clocks are kept so clock indices stay
    /// stable.
    pub fn trim(&self) -> TimedCea {
        let reach = self.reachable();
        let coreach = self.coreachable();
        let keep: Vec<bool> = (0..self.num_states)
            .map(|q| q == self.initial || (reach[q] && coreach[q]))
            .collect();
        let mut rename = vec![usize::MAX; self.num_states];
        let mut n = 0;
        for q in 0..self.num_states {
            if keep[q] {
                rename[q] = n;
                n += 1;
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|t| keep[t.from] && keep[t.to] && t.guard.satisfiable())
            .map(|t| Transition { from: rename[t.from], to: rename[t.to], ..t.clone() })
            .collect();
        TimedCea {
            num_states: n,
            vars: self.vars.clone(),
            clocks: self.clocks.clone(),
            transitions,
            initial: rename[self.initial],
            finals: self.finals.iter().filter(|&&f| keep[f]).map(|&f| rename[f]).collect(),
        }
    }

    /// Clocks mentioned by some guard.
    pub fn checked_clocks(&self) -> BTreeSet<Clock> {
        self.transitions.iter().flat_map(|t| t.guard.clocks()).collect()
    }

    /// Graphviz rendering for inspection.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tcea {\n  rankdir=LR;\n  node [shape=circle];\n");
        let _ = writeln!(s, "  start [shape=point];\n  start -> q{};", self.initial);
        for &f in &self.finals {
            let _ = writeln!(s, "  q{f} [shape=doublecircle];");
        }
        for t in &self.transitions {
            let label: Vec<&str> = t.label.iter().map(String::as_str).collect();
            let resets: Vec<&str> = t.resets.iter().map(|&z| self.clocks[z].as_str()).collect();
            let text = format!(
                "{}, {} / {{{}}}, {{{}}}",
                t.pred,
                t.guard.display(&self.clocks),
                label.join(","),
                resets.join(",")
            );
            let _ = writeln!(s, "  q{} -> q{} [label={:?}];", t.from, t.to, text);
        }
        s.push_str("}\n");
        s
    }
}

impl Default for TimedCea {
    fn default() -> Self {
        TimedCea::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;

    fn label(xs: &[&str]) -> VarSet {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn step_fires_matching_transitions() {
        let mut a = TimedCea::new();
        let q1 = a.add_state();
        let z = a.add_clock("z");
        a.add_transition(Transition {
            from: 0,
            pred: Predicate::basic("temp", Cmp::Gt, Value::Int(40)),
            guard: ClockCondition::True,
            label: label(&["X"]),
            resets: [z].into(),
            to: q1,
        });
        let e = Event::new("T").with("temp", Value::Int(45));
        let out = a.step(0, &ClockValuation::empty(1), &e, Rational::new(133, 100));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, q1);
        assert_eq!(out[0].1.get(z), Some(Rational::ZERO));
        assert_eq!(out[0].2, label(&["X"]));
        let cold = Event::new("T").with("temp", Value::Int(20));
        assert!(a.step(0, &ClockValuation::empty(1), &cold, Rational::ONE).is_empty());
    }

    #[test]
    fn structure_checks() {
        let mut a = TimedCea::new();
        let q1 = a.add_state();
        let z = a.add_clock("z");
        a.finals.insert(q1);
        a.add_transition(Transition {
            from: 0,
            pred: Predicate::True,
            guard: ClockCondition::atom(z, Cmp::Le, Rational::ONE),
            label: VarSet::new(),
            resets: BTreeSet::new(),
            to: q1,
        });
        assert!(matches!(a.check_structure(), Err(CeaError::UnresetClock { .. })));
        a.transitions[0].guard = ClockCondition::True;
        a.transitions[0].resets.insert(z);
        a.check_structure().unwrap();
        a.add_transition(Transition {
            from: q1,
            pred: Predicate::True,
            guard: ClockCondition::True,
            label: VarSet::new(),
            resets: BTreeSet::new(),
            to: 0,
        });
        assert!(matches!(a.check_structure(), Err(CeaError::EntersInitial { .. })));
    }

    #[test]
    fn json_round_trip() {
        let mut a = TimedCea::new();
        let q1 = a.add_state();
        let z = a.add_clock("z");
        a.finals.insert(q1);
        a.add_transition(Transition {
            from: 0,
            pred: Predicate::type_is("H"),
            guard: ClockCondition::atom(z, Cmp::Le, Rational::new(5, 2)),
            label: label(&["Y"]),
            resets: [z].into(),
            to: q1,
        });
        let text = serde_json::to_string(&a).unwrap();
        let back: TimedCea = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
        assert!(a.to_dot().contains("q0 -> q1"));
        assert_eq!(a.size(), 2 + (1 + 1 + 1 + 1));
    }
}
