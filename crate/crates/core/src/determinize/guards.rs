//! Predicate and guard types, and canonical guards for unions of boxes.

use std::collections::BTreeMap;

use crate::cea::{clock_box, conjunction_satisfiable, Atom, Clock, ClockCondition};
use crate::predicate::{satisfiable_literals, Cmp, Predicate};
use crate::rational::Rational;

/// Every sign vector `s` over `preds` whose type `⋀ s_i ? P_i : ¬P_i` is
/// satisfiable. Types partition the event space.
pub fn predicate_types(preds: &[&Predicate]) -> Vec<Vec<bool>> {
    fn go(preds: &[&Predicate], signs: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if signs.len() == preds.len() {
            out.push(signs.clone());
            return;
        }
        for s in [true, false] {
            signs.push(s);
            let lits: Vec<(&Predicate, bool)> =
                preds.iter().zip(signs.iter()).map(|(p, &s)| (*p, s)).collect();
            if satisfiable_literals(&lits) {
                go(preds, signs, out);
            }
            signs.pop();
        }
    }
    let mut out = Vec::new();
    go(preds, &mut Vec::new(), &mut out);
    out
}

/// The predicate of a type. Negated literals of tautologies never appear
/// because such types are unsatisfiable.
pub fn predicate_of_type(preds: &[&Predicate], signs: &[bool]) -> Predicate {
    let mut pos = Predicate::True;
    let mut neg = Predicate::True;
    for (p, &s) in preds.iter().zip(signs) {
        if s {
            if **p != Predicate::True {
                pos = Predicate::and(pos, (*p).clone());
            }
        } else {
            neg = Predicate::and(neg, Predicate::negate((*p).clone()));
        }
    }
    Predicate::and(pos, neg)
}

/// Every sign vector over `guards` whose conjunction of guards and negated
/// guards has a non-negative solution, with that conjunction in DNF.
pub fn guard_types(guards: &[&ClockCondition]) -> Vec<(Vec<bool>, Vec<Vec<Atom>>)> {
    fn go(
        guards: &[&ClockCondition],
        signs: &mut Vec<bool>,
        dnf: Vec<Vec<Atom>>,
        out: &mut Vec<(Vec<bool>, Vec<Vec<Atom>>)>,
    ) {
        let i = signs.len();
        if i == guards.len() {
            out.push((signs.clone(), dnf));
            return;
        }
        for s in [true, false] {
            let lit = if s { guards[i].dnf() } else { guards[i].negate().dnf() };
            let mut next = Vec::new();
            for c in &dnf {
                for d in &lit {
                    let mut conj = c.clone();
                    conj.extend(d.iter().copied());
                    conj.sort();
                    conj.dedup();
                    if conjunction_satisfiable(&conj) && !next.contains(&conj) {
                        next.push(conj);
                    }
                }
            }
            if !next.is_empty() {
                signs.push(s);
                go(guards, signs, next, out);
                signs.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(guards, &mut Vec::new(), vec![Vec::new()], &mut out);
    out
}

/// An interval of clock values, always within `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Iv {
    lo: Rational,
    lo_strict: bool,
    hi: Option<(Rational, bool)>,
}

impl Iv {
    const FULL: Iv = Iv { lo: Rational::ZERO, lo_strict: false, hi: None };

    /// `a.lo` is at or below `b.lo`.
    fn lo_le(a: &Iv, b: &Iv) -> bool {
        a.lo < b.lo || (a.lo == b.lo && (!a.lo_strict || b.lo_strict))
    }

    /// `a.hi` is at or above `b.hi`.
    fn hi_ge(a: &Iv, b: &Iv) -> bool {
        match (a.hi, b.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((x, xs)), Some((y, ys))) => x > y || (x == y && (!xs || ys)),
        }
    }

    fn contains(&self, other: &Iv) -> bool {
        Iv::lo_le(self, other) && Iv::hi_ge(self, other)
    }

    /// The union when it is an interval.
    fn union(a: &Iv, b: &Iv) -> Option<Iv> {
        let (first, second) = if Iv::lo_le(a, b) { (a, b) } else { (b, a) };
        let connected = match first.hi {
            None => true,
            Some((h, hs)) => h > second.lo || (h == second.lo && !(hs && second.lo_strict)),
        };
        connected.then(|| Iv {
            lo: first.lo,
            lo_strict: first.lo_strict,
            hi: if Iv::hi_ge(first, second) { first.hi } else { second.hi },
        })
    }

    fn to_guard(self, z: Clock) -> ClockCondition {
        if let Some((h, false)) = self.hi {
            if h == self.lo && !self.lo_strict {
                return ClockCondition::atom(z, Cmp::Eq, h);
            }
        }
        let lower = if self.lo == Rational::ZERO && !self.lo_strict {
            ClockCondition::True
        } else {
            ClockCondition::atom(z, if self.lo_strict { Cmp::Gt } else { Cmp::Ge }, self.lo)
        };
        let upper = match self.hi {
            None => ClockCondition::True,
            Some((h, s)) => ClockCondition::atom(z, if s { Cmp::Lt } else { Cmp::Le }, h),
        };
        ClockCondition::and(lower, upper)
    }
}

type Boxed = BTreeMap<Clock, Iv>;

fn to_box(conj: &[Atom]) -> Option<Boxed> {
    let mut out = Boxed::new();
    let mut clocks: Vec<Clock> = conj.iter().map(|a| a.0).collect();
    clocks.sort_unstable();
    clocks.dedup();
    for z in clocks {
        let b = clock_box(conj, z)?;
        let (lo, lo_strict) = b.lo.expect("clock boxes are bounded below by zero");
        let iv = Iv { lo, lo_strict, hi: b.hi };
        if iv != Iv::FULL {
            out.insert(z, iv);
        }
    }
    Some(out)
}

fn get(b: &Boxed, z: Clock) -> Iv {
    b.get(&z).copied().unwrap_or(Iv::FULL)
}

fn box_contains(outer: &Boxed, inner: &Boxed) -> bool {
    outer.iter().all(|(&z, iv)| iv.contains(&get(inner, z)))
}

/// Merges two boxes that agree on every clock but one and whose intervals
/// on that clock form an interval.
fn box_union(a: &Boxed, b: &Boxed) -> Option<Boxed> {
    let clocks: Vec<Clock> = a.keys().chain(b.keys()).copied().collect();
    let differing: Vec<Clock> = {
        let mut d: Vec<Clock> = clocks.into_iter().filter(|&z| get(a, z) != get(b, z)).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    match differing.as_slice() {
        [] => Some(a.clone()),
        [z] => {
            let iv = Iv::union(&get(a, *z), &get(b, *z))?;
            let mut out = a.clone();
            if iv == Iv::FULL {
                out.remove(z);
            } else {
                out.insert(*z, iv);
            }
            Some(out)
        }
        _ => None,
    }
}

/// A canonical guard for the union of the given conjunctions: boxes are
/// merged while possible and each clock interval is written with at most
/// two atoms, omitting `z ≥ 0` and `z < ∞`.
pub fn simplify_union(dnf: &[Vec<Atom>]) -> ClockCondition {
    let mut boxes: Vec<Boxed> = dnf.iter().filter_map(|c| to_box(c)).collect();
    loop {
        let mut changed = false;
        'outer: for i in 0..boxes.len() {
            for j in 0..boxes.len() {
                if i == j {
                    continue;
                }
                if box_contains(&boxes[j], &boxes[i]) {
                    boxes.remove(i);
                    changed = true;
                    break 'outer;
                }
                if let Some(u) = box_union(&boxes[i], &boxes[j]) {
                    let (hi, lo) = (i.max(j), i.min(j));
                    boxes.remove(hi);
                    boxes[lo] = u;
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            break;
        }
    }
    ClockCondition::any(
        boxes
            .into_iter()
            .map(|b| ClockCondition::all(b.into_iter().map(|(z, iv)| iv.to_guard(z)))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Event, Value};

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn adjacent_intervals_merge() {
        let dnf = vec![vec![(0, Cmp::Le, r(1))], vec![(0, Cmp::Gt, r(1)), (0, Cmp::Le, r(5))]];
        assert_eq!(simplify_union(&dnf), ClockCondition::atom(0, Cmp::Le, r(5)));
        let dnf = vec![vec![(0, Cmp::Lt, r(1))], vec![(0, Cmp::Gt, r(1))]];
        assert_eq!(simplify_union(&dnf).size(), 2);
        let dnf = vec![vec![(0, Cmp::Le, r(2))], vec![(0, Cmp::Ge, r(2))]];
        assert_eq!(simplify_union(&dnf), ClockCondition::True);
    }

    #[test]
    fn point_intervals_become_equalities() {
        let dnf = vec![vec![(1, Cmp::Ge, r(3)), (1, Cmp::Le, r(3))]];
        assert_eq!(simplify_union(&dnf), ClockCondition::atom(1, Cmp::Eq, r(3)));
    }

    #[test]
    fn predicate_types_partition_events() {
        let hot = Predicate::basic("temp", Cmp::Gt, Value::Int(40));
        let cold = Predicate::basic("temp", Cmp::Lt, Value::Int(25));
        let preds = [&hot, &cold, &Predicate::True];
        let types = predicate_types(&preds);
        // hot∧¬cold, ¬hot∧cold, ¬hot∧¬cold (True is never negated)
        assert_eq!(types.len(), 3);
        for t in [10, 30, 45] {
            let e = Event::new("T").with("temp", Value::Int(t));
            let n = types.iter().filter(|s| predicate_of_type(&preds, s).sat(&e)).count();
            assert_eq!(n, 1);
        }
    }

    #[test]
    fn guard_types_partition_valuations() {
        let g1 = ClockCondition::atom(0, Cmp::Le, r(1));
        let g2 = ClockCondition::atom(0, Cmp::Le, r(5));
        let types = guard_types(&[&g1, &g2]);
        assert_eq!(types.len(), 3);
        for v in [0, 1, 3, 5, 7] {
            let n = types
                .iter()
                .filter(|(_, dnf)| {
                    dnf.iter().any(|c| c.iter().all(|a| a.1.eval(&r(v), &a.2)))
                })
                .count();
            assert_eq!(n, 1, "value {v}");
        }
    }
}
