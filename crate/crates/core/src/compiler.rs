//! Compilation of timed CEL formulas into timed CEA, operator by operator.
//!
//! [`compile`] gives every time operator its own fresh clock. The windowed
//! compiler shares two clocks across the whole formula: `zN`, reset by every
//! transition leaving the initial state and checked by time windows, and
//! `zX`, reset by every marking transition of the inner formulas and checked
//! by timed sequencing and iteration. The shared clocks are what makes the
//! result have synchronous resets, hence determinizable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::cea::{Clock, ClockCondition, State, TimedCea, Transition};
use crate::cel::{classify, CelFormula};
use crate::model::{Interval, Var, VarSet};
use crate::predicate::{Cmp, Predicate};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("formula is not in the windowed fragment: {0}")]
    NotWindowed(String),
}

/// `T_φ` with `⟦T_φ⟧ = ⟦φ⟧`.
pub fn compile(phi: &CelFormula) -> TimedCea {
    let mut c = Compiler { clocks: Vec::new(), shared: None };
    let frag = c.build(phi);
    c.finish(frag)
}

/// Two-clock automaton for a windowed formula. Clock 0 is `zN`, clock 1 is
/// `zX`.
pub fn compile_windowed(phi: &CelFormula) -> Result<TimedCea, CompileError> {
    if !classify(phi).windowed {
        return Err(CompileError::NotWindowed(phi.to_string()));
    }
    let mut c = Compiler {
        clocks: vec!["zN".to_string(), "zX".to_string()],
        shared: Some(Shared { window: 0, mark: 1 }),
    };
    let frag = c.windowed(phi);
    Ok(c.finish(frag))
}

/// The guard `z ∈ I`; `True` when the interval imposes nothing.
pub fn interval_guard(z: Clock, i: &Interval) -> ClockCondition {
    let low = if i.low == Rational::ZERO && !i.low_open {
        ClockCondition::True
    } else {
        ClockCondition::atom(z, if i.low_open { Cmp::Gt } else { Cmp::Ge }, i.low)
    };
    let high = match i.high {
        None => ClockCondition::True,
        Some(h) => ClockCondition::atom(z, if i.high_open { Cmp::Lt } else { Cmp::Le }, h),
    };
    ClockCondition::and(low, high)
}

#[derive(Clone, Copy)]
struct Shared {
    window: Clock,
    mark: Clock,
}

struct Compiler {
    clocks: Vec<String>,
    shared: Option<Shared>,
}

/// An automaton under construction; clocks live in the compiler.
#[derive(Clone, Debug)]
struct Frag {
    n: usize,
    trans: Vec<Transition>,
    init: State,
    finals: BTreeSet<State>,
}

impl Frag {
    fn out_of(&self, q: State) -> impl Iterator<Item = &Transition> {
        self.trans.iter().filter(move |t| t.from == q)
    }

    fn final_transitions(&self) -> impl Iterator<Item = &Transition> {
        self.trans.iter().filter(move |t| self.finals.contains(&t.to))
    }

    fn shifted(self, by: usize) -> Frag {
        Frag {
            n: self.n,
            trans: self
                .trans
                .into_iter()
                .map(|t| Transition { from: t.from + by, to: t.to + by, ..t })
                .collect(),
            init: self.init + by,
            finals: self.finals.into_iter().map(|q| q + by).collect(),
        }
    }

    fn check_initial(&self) {
        debug_assert!(
            self.trans.iter().all(|t| t.to != self.init),
            "construction produced a transition into the initial state"
        );
    }
}

fn skip_loop(q: State) -> Transition {
    Transition {
        from: q,
        pred: Predicate::True,
        guard: ClockCondition::True,
        label: VarSet::new(),
        resets: BTreeSet::new(),
        to: q,
    }
}

impl Compiler {
    fn fresh_clock(&mut self, prefix: &str) -> Clock {
        self.clocks.push(format!("{prefix}{}", self.clocks.len()));
        self.clocks.len() - 1
    }

    fn finish(&self, frag: Frag) -> TimedCea {
        frag.check_initial();
        let mut a = TimedCea {
            num_states: frag.n,
            vars: VarSet::new(),
            clocks: self.clocks.clone(),
            transitions: Vec::new(),
            initial: frag.init,
            finals: frag.finals,
        };
        for t in frag.trans {
            a.add_transition(t);
        }
        a
    }

    /// Level two of the windowed grammar.
    fn windowed(&mut self, phi: &CelFormula) -> Frag {
        use CelFormula as F;
        let sh = self.shared.expect("windowed mode");
        if !phi.has_time_operator() || crate::cel::is_simple_formula(phi) {
            let mut f = self.build(phi);
            for t in f.trans.iter_mut().filter(|t| t.from == f.init) {
                t.resets.insert(sh.window);
            }
            return f;
        }
        let f = match phi {
            F::As(p, x) => as_var(self.windowed(p), x),
            F::Filter(p, x, pred) => filter(self.windowed(p), x, pred),
            F::Project(l, p) => project(self.windowed(p), l),
            F::Or(a, b) => {
                let (a, b) = (self.windowed(a), self.windowed(b));
                or(a, b)
            }
            F::And(a, b) => {
                let (a, b) = (self.windowed(a), self.windowed(b));
                and(a, b)
            }
            F::Within(p, i) => {
                let inner = self.windowed(p);
                within(inner, i, sh.window)
            }
            other => unreachable!("classified windowed but got {}", other.operator_name()),
        };
        f.check_initial();
        f
    }

    fn build(&mut self, phi: &CelFormula) -> Frag {
        use CelFormula as F;
        let f = match phi {
            F::EventType(r) => {
                let resets = match self.shared {
                    Some(sh) => [sh.mark].into(),
                    None => BTreeSet::new(),
                };
                Frag {
                    n: 2,
                    trans: vec![Transition {
                        from: 0,
                        pred: Predicate::type_is(r.clone()),
                        guard: ClockCondition::True,
                        label: [r.clone()].into(),
                        resets,
                        to: 1,
                    }],
                    init: 0,
                    finals: [1].into(),
                }
            }
            F::As(p, x) => as_var(self.build(p), x),
            F::Filter(p, x, pred) => filter(self.build(p), x, pred),
            F::Project(l, p) => project(self.build(p), l),
            F::Or(a, b) => {
                let (a, b) = (self.build(a), self.build(b));
                or(a, b)
            }
            F::And(a, b) => {
                let (a, b) = (self.build(a), self.build(b));
                and(a, b)
            }
            F::Seq(a, b) => {
                let (a, b) = (self.build(a), self.build(b));
                seq(a, b, false, None)
            }
            F::ContigSeq(a, b) => {
                let (a, b) = (self.build(a), self.build(b));
                seq(a, b, true, None)
            }
            F::TimedSeq(a, i, b) => {
                let (a, b) = (self.build(a), self.build(b));
                let z = self.gap_clock();
                seq(a, b, false, Some((z, i)))
            }
            F::TimedContigSeq(a, i, b) => {
                let (a, b) = (self.build(a), self.build(b));
                let z = self.gap_clock();
                seq(a, b, true, Some((z, i)))
            }
            F::Plus(p) => plus(self.build(p), false, None),
            F::ContigPlus(p) => plus(self.build(p), true, None),
            F::TimedIter(p, i) => {
                let inner = self.build(p);
                let z = self.gap_clock();
                plus(inner, false, Some((z, i)))
            }
            F::TimedContigIter(p, i) => {
                let inner = self.build(p);
                let z = self.gap_clock();
                plus(inner, true, Some((z, i)))
            }
            F::Within(p, i) => {
                let inner = self.build(p);
                let z = match self.shared {
                    Some(sh) => sh.window,
                    None => self.fresh_clock("zN"),
                };
                within(inner, i, z)
            }
        };
        f.check_initial();
        f
    }

    fn gap_clock(&mut self) -> Clock {
        match self.shared {
            Some(sh) => sh.mark,
            None => self.fresh_clock("zX"),
        }
    }
}

fn as_var(mut f: Frag, x: &Var) -> Frag {
    for t in f.trans.iter_mut().filter(|t| t.is_marking()) {
        t.label.insert(x.clone());
    }
    f
}

fn filter(mut f: Frag, x: &Var, p: &Predicate) -> Frag {
    for t in f.trans.iter_mut().filter(|t| t.label.contains(x)) {
        t.pred = Predicate::and(t.pred.clone(), p.clone());
    }
    f
}

fn project(mut f: Frag, l: &VarSet) -> Frag {
    for t in f.trans.iter_mut() {
        t.label.retain(|x| l.contains(x));
    }
    f
}

fn or(a: Frag, b: Frag) -> Frag {
    let b = b.shifted(a.n);
    let q0 = a.n + b.n;
    let mut trans: Vec<Transition> = Vec::new();
    for src in [&a, &b] {
        trans.extend(src.out_of(src.init).map(|t| Transition { from: q0, ..t.clone() }));
    }
    trans.extend(a.trans);
    trans.extend(b.trans);
    Frag { n: q0 + 1, trans, init: q0, finals: a.finals.union(&b.finals).copied().collect() }
}

/// Product over the reachable pairs, synchronizing on equal labels.
fn and(a: Frag, b: Frag) -> Frag {
    debug_assert!(
        {
            let ca: BTreeSet<Clock> =
                a.trans.iter().flat_map(|t| t.guard.clocks().into_iter().chain(t.resets.clone())).collect();
            let cb: BTreeSet<Clock> =
                b.trans.iter().flat_map(|t| t.guard.clocks().into_iter().chain(t.resets.clone())).collect();
            // Shared clocks only occur in windowed mode, where both operands
            // reset them on exactly the same steps.
            ca.is_disjoint(&cb) || ca.iter().all(|z| *z <= 1)
        },
        "conjunction operands must use disjoint clocks"
    );
    let mut ids: BTreeMap<(State, State), State> = BTreeMap::new();
    let mut queue = VecDeque::new();
    ids.insert((a.init, b.init), 0);
    queue.push_back((a.init, b.init));
    let mut trans = Vec::new();
    while let Some((p1, p2)) = queue.pop_front() {
        let from = ids[&(p1, p2)];
        for t1 in a.out_of(p1) {
            for t2 in b.out_of(p2).filter(|t2| t2.label == t1.label) {
                let key = (t1.to, t2.to);
                let next = ids.len();
                let to = *ids.entry(key).or_insert_with(|| {
                    queue.push_back(key);
                    next
                });
                trans.push(Transition {
                    from,
                    pred: Predicate::and(t1.pred.clone(), t2.pred.clone()),
                    guard: ClockCondition::and(t1.guard.clone(), t2.guard.clone()),
                    label: t1.label.clone(),
                    resets: t1.resets.union(&t2.resets).copied().collect(),
                    to,
                });
            }
        }
    }
    let finals = ids
        .iter()
        .filter(|((p1, p2), _)| a.finals.contains(p1) && b.finals.contains(p2))
        .map(|(_, &q)| q)
        .collect();
    Frag { n: ids.len(), trans, init: 0, finals }
}

/// `;` and `:`, optionally with a gap constraint checked on clock `z`.
fn seq(a: Frag, b: Frag, contiguous: bool, gap: Option<(Clock, &Interval)>) -> Frag {
    let b = b.shifted(a.n);
    let mut trans: Vec<Transition> = a.trans.clone();
    trans.extend(b.trans.iter().cloned());
    let finals = b.finals.clone();
    match gap {
        None => {
            let hub = b.init;
            trans.extend(a.final_transitions().map(|t| Transition { to: hub, ..t.clone() }));
            if !contiguous {
                trans.push(skip_loop(hub));
            }
            Frag { n: a.n + b.n, trans, init: a.init, finals }
        }
        Some((z, i)) => {
            let hub = a.n + b.n;
            let gamma = crate::compiler::interval_guard(z, i);
            trans.extend(a.final_transitions().map(|t| {
                let mut t = t.clone();
                t.resets.insert(z);
                t.to = hub;
                t
            }));
            if !contiguous {
                trans.push(skip_loop(hub));
            }
            trans.extend(b.out_of(b.init).map(|t| Transition {
                from: hub,
                guard: ClockCondition::and(t.guard.clone(), gamma.clone()),
                ..t.clone()
            }));
            Frag { n: hub + 1, trans, init: a.init, finals }
        }
    }
}

/// `+` and `⊕`, optionally with a gap constraint between iterations.
fn plus(f: Frag, contiguous: bool, gap: Option<(Clock, &Interval)>) -> Frag {
    let hub = f.n;
    let (gamma, reset): (ClockCondition, Option<Clock>) = match gap {
        None => (ClockCondition::True, None),
        Some((z, i)) => (interval_guard(z, i), Some(z)),
    };
    let with_reset = |t: &Transition| {
        let mut t = t.clone();
        if let Some(z) = reset {
            t.resets.insert(z);
        }
        t
    };
    let mut trans = f.trans.clone();
    trans.extend(f.final_transitions().map(|t| Transition { to: hub, ..with_reset(t) }));
    if !contiguous {
        trans.push(skip_loop(hub));
    }
    for t in f.out_of(f.init) {
        let guard = ClockCondition::and(t.guard.clone(), gamma.clone());
        trans.push(Transition { from: hub, guard: guard.clone(), ..t.clone() });
        if f.finals.contains(&t.to) {
            trans.push(Transition { from: hub, to: hub, guard, ..with_reset(t) });
        }
    }
    Frag { n: hub + 1, trans, init: f.init, finals: f.finals }
}

/// `φ WITHIN I` on clock `z`, reset when the run starts and checked when it
/// ends.
fn within(f: Frag, i: &Interval, z: Clock) -> Frag {
    let qf = f.n;
    let gamma = interval_guard(z, i);
    let mut trans = Vec::new();
    for t in &f.trans {
        let into_final = f.finals.contains(&t.to);
        if t.from == f.init {
            if into_final {
                if i.contains(Rational::ZERO) {
                    trans.push(Transition { to: qf, ..t.clone() });
                }
            } else {
                let mut t = t.clone();
                t.resets.insert(z);
                trans.push(t);
            }
        } else {
            trans.push(t.clone());
            if into_final {
                trans.push(Transition {
                    guard: ClockCondition::and(t.guard.clone(), gamma.clone()),
                    to: qf,
                    ..t.clone()
                });
            }
        }
    }
    Frag { n: qf + 1, trans, init: f.init, finals: [qf].into() }
}

/// Removes resets that can never influence a guard: a reset of `z` on a
/// transition into `q` is dead when no path from `q` checks `z` before
/// resetting it again. Language-preserving.
pub fn prune_dead_resets(a: &TimedCea) -> TimedCea {
    let live = live_clocks(a);
    let mut out = a.clone();
    for t in &mut out.transitions {
        t.resets.retain(|z| live[t.to].contains(z));
    }
    out
}

/// For each state, the clocks that some path from it checks before
/// resetting.
pub fn live_clocks(a: &TimedCea) -> Vec<BTreeSet<Clock>> {
    let mut live: Vec<BTreeSet<Clock>> = vec![BTreeSet::new(); a.num_states];
    let mut changed = true;
    while changed {
        changed = false;
        for t in &a.transitions {
            let mut need = t.guard.clocks();
            need.extend(live[t.to].iter().filter(|z| !t.resets.contains(z)));
            for z in need {
                if live[t.from].insert(z) {
                    changed = true;
                }
            }
        }
    }
    live
}

/// Removes clocks that no guard mentions, renumbering the rest.
pub fn drop_unchecked_clocks(a: &TimedCea) -> TimedCea {
    let checked = a.checked_clocks();
    let mut rename = vec![usize::MAX; a.clocks.len()];
    let mut clocks = Vec::new();
    for (z, name) in a.clocks.iter().enumerate() {
        if checked.contains(&z) {
            rename[z] = clocks.len();
            clocks.push(name.clone());
        }
    }
    let mut out = a.clone();
    out.clocks = clocks;
    for t in &mut out.transitions {
        t.guard = t.guard.map_clocks(&|z| rename[z]);
        t.resets = t.resets.iter().filter(|&&z| rename[z] != usize::MAX).map(|&z| rename[z]).collect();
    }
    out
}

/// Trims, prunes dead resets and drops clocks that are never checked.
pub fn simplify(a: &TimedCea) -> TimedCea {
    drop_unchecked_clocks(&prune_dead_resets(&a.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cea::{eval_cea_oracle, is_monotonic, Monotonicity};
    use crate::cel::{eval_cel_oracle, parse_query};

    use crate::samples::sensor_stream as s0;

    #[test]
    fn event_type_is_two_states_one_transition() {
        let a = compile(&CelFormula::event("R"));
        assert_eq!(a.num_states, 2);
        assert_eq!(a.transitions.len(), 1);
        assert_eq!(a.num_clocks(), 0);
    }

    #[test]
    fn interval_guards() {
        let g = interval_guard(0, &Interval::unbounded());
        assert!(g.is_true());
        let g = interval_guard(0, &Interval::at_most(Rational::ONE));
        assert_eq!(g, ClockCondition::atom(0, Cmp::Le, Rational::ONE));
    }

    #[test]
    fn compiled_examples_match_the_oracle() {
        let s = s0();
        for q in [
            "PROJECT[X, Y, T]((H AS X :[0,1] (T (+)[0,1]) :[0,1] H AS Y) FILTER (X[hum < 30] AND Y[hum > 30]))",
            "PROJECT[X, Y](((T AS X ;<=1 T ; H AS Y) WITHIN <=5) FILTER (T[temp >= 40] AND H[hum < 25]))",
            "(T +[0,2]) WITHIN [1,3]",
            "(H ; T) AND (H : T)",
            "(H OR T) +",
        ] {
            let phi = parse_query(q).unwrap();
            let a = compile(&phi);
            a.check_structure().unwrap();
            assert_eq!(eval_cea_oracle(&a, &s).unwrap(), eval_cel_oracle(&phi, &s).unwrap(), "{q}");
            let w = compile_windowed(&phi).unwrap();
            assert!(w.num_clocks() <= 2);
            assert_eq!(eval_cea_oracle(&w, &s).unwrap(), eval_cel_oracle(&phi, &s).unwrap(), "{q}");
        }
    }

    #[test]
    fn windowed_rejects_nested_windows() {
        let phi = parse_query("(A WITHIN <=1) ;<=2 B").unwrap();
        assert!(matches!(compile_windowed(&phi), Err(CompileError::NotWindowed(_))));
    }

    #[test]
    fn simple_formula_never_checks_the_window_clock() {
        let phi = parse_query("A ;<=2 B").unwrap();
        let w = compile_windowed(&phi).unwrap();
        assert!(!w.checked_clocks().contains(&0));
        assert_eq!(is_monotonic(&w), Monotonicity::Le);
    }
}
