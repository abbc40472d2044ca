//! Clock conditions and clock valuations.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::predicate::{Cmp, NumericBox};
use crate::rational::Rational;

/// Clocks are indices into the automaton's clock list.
pub type Clock = usize;

/// A clock atom `z ∼ c`.
pub type Atom = (Clock, Cmp, Rational);

/// Boolean combinations of `z ∼ c` with `∼ ∈ {<, ≤, =, ≥, >}`.
///
/// `False` is internal: it arises from negating `True` and never appears in
/// a well-formed user automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockCondition {
    True,
    False,
    Atom { clock: Clock, cmp: Cmp, c: Rational },
    And(Box<ClockCondition>, Box<ClockCondition>),
    Or(Box<ClockCondition>, Box<ClockCondition>),
}

use ClockCondition as G;

impl ClockCondition {
    pub fn atom(clock: Clock, cmp: Cmp, c: Rational) -> ClockCondition {
        G::Atom { clock, cmp, c }
    }

    /// Conjunction with unit/zero simplification.
    pub fn and(a: ClockCondition, b: ClockCondition) -> ClockCondition {
        match (a, b) {
            (G::True, x) | (x, G::True) => x,
            (G::False, _) | (_, G::False) => G::False,
            (a, b) => G::And(Box::new(a), Box::new(b)),
        }
    }

    /// Disjunction with unit/zero simplification.
    pub fn or(a: ClockCondition, b: ClockCondition) -> ClockCondition {
        match (a, b) {
            (G::False, x) | (x, G::False) => x,
            (G::True, _) | (_, G::True) => G::True,
            (a, b) => G::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn all(items: impl IntoIterator<Item = ClockCondition>) -> ClockCondition {
        items.into_iter().fold(G::True, G::and)
    }

    pub fn any(items: impl IntoIterator<Item = ClockCondition>) -> ClockCondition {
        items.into_iter().fold(G::False, G::or)
    }

    /// Number of atoms (constants count as one).
    pub fn size(&self) -> usize {
        match self {
            G::True | G::False | G::Atom { .. } => 1,
            G::And(a, b) | G::Or(a, b) => a.size() + b.size(),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, G::True)
    }

    /// Clocks mentioned by the condition.
    pub fn clocks(&self) -> BTreeSet<Clock> {
        let mut out = BTreeSet::new();
        self.collect_clocks(&mut out);
        out
    }

    fn collect_clocks(&self, out: &mut BTreeSet<Clock>) {
        match self {
            G::True | G::False => {}
            G::Atom { clock, .. } => {
                out.insert(*clock);
            }
            G::And(a, b) | G::Or(a, b) => {
                a.collect_clocks(out);
                b.collect_clocks(out);
            }
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms(&self, f: &mut dyn FnMut(Atom)) {
        match self {
            G::True | G::False => {}
            G::Atom { clock, cmp, c } => f((*clock, *cmp, *c)),
            G::And(a, b) | G::Or(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Evaluates the condition on total clock values (no domain check).
    pub fn eval_with(&self, value: &dyn Fn(Clock) -> Rational) -> bool {
        match self {
            G::True => true,
            G::False => false,
            G::Atom { clock, cmp, c } => cmp.eval(&value(*clock), c),
            G::And(a, b) => a.eval_with(value) && b.eval_with(value),
            G::Or(a, b) => a.eval_with(value) || b.eval_with(value),
        }
    }

    /// The complement over valuations that initialize every mentioned clock.
    /// Every `∧` becomes `∨` and vice versa, `z = c` becomes `z > c ∨ z < c`,
    /// so the result has at most twice as many atoms.
    pub fn negate(&self) -> ClockCondition {
        match self {
            G::True => G::False,
            G::False => G::True,
            G::Atom { clock, cmp, c } => match cmp {
                Cmp::Eq => G::Or(
                    Box::new(G::atom(*clock, Cmp::Gt, *c)),
                    Box::new(G::atom(*clock, Cmp::Lt, *c)),
                ),
                Cmp::Ne => G::atom(*clock, Cmp::Eq, *c),
                other => G::atom(*clock, other.complement(), *c),
            },
            G::And(a, b) => G::Or(Box::new(a.negate()), Box::new(b.negate())),
            G::Or(a, b) => G::And(Box::new(a.negate()), Box::new(b.negate())),
        }
    }

    /// Disjunctive normal form as a list of atom conjunctions. `False` has no
    /// conjunct; `True` has one empty conjunct.
    pub fn dnf(&self) -> Vec<Vec<Atom>> {
        match self {
            G::True => vec![vec![]],
            G::False => vec![],
            G::Atom { clock, cmp, c } => vec![vec![(*clock, *cmp, *c)]],
            G::Or(a, b) => {
                let mut out = a.dnf();
                out.extend(b.dnf());
                out
            }
            G::And(a, b) => {
                let (l, r) = (a.dnf(), b.dnf());
                let mut out = Vec::with_capacity(l.len() * r.len());
                for x in &l {
                    for y in &r {
                        let mut conj = x.clone();
                        conj.extend(y.iter().copied());
                        out.push(conj);
                    }
                }
                out
            }
        }
    }

    /// Whether some valuation (initializing every mentioned clock with a
    /// non-negative value) satisfies the condition.
    pub fn satisfiable(&self) -> bool {
        self.dnf().iter().any(|conj| conjunction_satisfiable(conj))
    }

    /// Whether the condition is a (possibly empty) conjunction of atoms, all
    /// using comparator `cmp`.
    pub fn is_conjunction_of(&self, cmp: Cmp) -> bool {
        match self {
            G::True => true,
            G::Atom { cmp: c, .. } => *c == cmp,
            G::And(a, b) => a.is_conjunction_of(cmp) && b.is_conjunction_of(cmp),
            G::False | G::Or(..) => false,
        }
    }

    /// Renames clocks through `f`.
    pub fn map_clocks(&self, f: &dyn Fn(Clock) -> Clock) -> ClockCondition {
        match self {
            G::True => G::True,
            G::False => G::False,
            G::Atom { clock, cmp, c } => G::atom(f(*clock), *cmp, *c),
            G::And(a, b) => G::And(Box::new(a.map_clocks(f)), Box::new(b.map_clocks(f))),
            G::Or(a, b) => G::Or(Box::new(a.map_clocks(f)), Box::new(b.map_clocks(f))),
        }
    }

    /// Replaces every atom on `clock` by `with` (used to drop clocks that
    /// are known to be irrelevant).
    pub fn substitute_clock(&self, clock: Clock, with: &ClockCondition) -> ClockCondition {
        match self {
            G::Atom { clock: z, .. } if *z == clock => with.clone(),
            G::And(a, b) => {
                G::and(a.substitute_clock(clock, with), b.substitute_clock(clock, with))
            }
            G::Or(a, b) => G::or(a.substitute_clock(clock, with), b.substitute_clock(clock, with)),
            other => other.clone(),
        }
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        GuardDisplay { g: self, names }
    }
}

/// Whether a conjunction of atoms has a non-negative solution.
pub fn conjunction_satisfiable(conj: &[Atom]) -> bool {
    let mut clocks: Vec<Clock> = conj.iter().map(|a| a.0).collect();
    clocks.sort_unstable();
    clocks.dedup();
    clocks.iter().all(|&z| clock_box(conj, z).is_some())
}

/// The set of values of clock `z` permitted by a conjunction (`None` when
/// empty), intersected with `[0, ∞)`.
pub(crate) fn clock_box(conj: &[Atom], z: Clock) -> Option<NumericBox> {
    let mut cons: Vec<(Cmp, Rational)> = vec![(Cmp::Ge, Rational::ZERO)];
    cons.extend(conj.iter().filter(|a| a.0 == z).map(|a| (a.1, a.2)));
    NumericBox::from_constraints(&cons)
}

struct GuardDisplay<'a> {
    g: &'a ClockCondition,
    names: &'a [String],
}

impl fmt::Display for GuardDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn sub<'b>(g: &'b ClockCondition, names: &'b [String]) -> GuardDisplay<'b> {
            GuardDisplay { g, names }
        }
        match self.g {
            G::True => f.write_str("true"),
            G::False => f.write_str("false"),
            G::Atom { clock, cmp, c } => {
                let name = self.names.get(*clock).map(String::as_str).unwrap_or("?");
                write!(f, "{name} {cmp} {c}")
            }
            G::And(a, b) => write!(f, "({} ∧ {})", sub(a, self.names), sub(b, self.names)),
            G::Or(a, b) => write!(f, "({} ∨ {})", sub(a, self.names), sub(b, self.names)),
        }
    }
}

/// A partial assignment of elapsed times to clocks; `None` means the clock
/// has not been initialized.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ClockValuation(pub Vec<Option<Rational>>);

impl ClockValuation {
    /// The trivial valuation over `n` clocks: nothing initialized.
    pub fn empty(n: usize) -> ClockValuation {
        ClockValuation(vec![None; n])
    }

    pub fn get(&self, z: Clock) -> Option<Rational> {
        self.0.get(z).copied().flatten()
    }

    pub fn set(&mut self, z: Clock, v: Rational) {
        if self.0.len() <= z {
            self.0.resize(z + 1, None);
        }
        self.0[z] = Some(v);
    }

    pub fn domain(&self) -> BTreeSet<Clock> {
        (0..self.0.len()).filter(|&z| self.0[z].is_some()).collect()
    }

    /// `ν + t`: every initialized clock advances by `t`.
    pub fn advance(&self, t: Rational) -> ClockValuation {
        ClockValuation(self.0.iter().map(|v| v.map(|x| x + t)).collect())
    }

    /// `reset_Z(ν)`: clocks in `Z` become zero (and initialized).
    pub fn reset(&self, zs: &BTreeSet<Clock>) -> ClockValuation {
        let mut out = self.clone();
        for &z in zs {
            out.set(z, Rational::ZERO);
        }
        out
    }
}

/// `ν ⊨ γ`: every clock of `γ` must be initialized and the condition must
/// hold under substitution.
pub fn guard_sat(nu: &ClockValuation, g: &ClockCondition) -> bool {
    if g.clocks().iter().any(|&z| nu.get(z).is_none()) {
        return false;
    }
    g.eval_with(&|z| nu.get(z).expect("checked"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn valuation_examples() {
        // clocks: x = 0, y = 1, z = 2
        let mut nu = ClockValuation::empty(3);
        nu.set(0, r(5, 1));
        nu.set(1, r(1, 2));
        let g1 = G::or(G::atom(0, Cmp::Ge, r(4, 1)), G::atom(1, Cmp::Lt, r(1, 2)));
        assert!(guard_sat(&nu, &g1));
        let g2 = G::and(G::atom(2, Cmp::Le, r(5, 3)), G::atom(1, Cmp::Ge, r(1, 1)));
        assert!(!guard_sat(&nu, &g2));
        assert!(guard_sat(&nu, &G::True));
        assert!(guard_sat(&ClockValuation::empty(0), &G::True));
    }

    #[test]
    fn negation_rules() {
        let le = G::atom(0, Cmp::Le, r(3, 1));
        assert_eq!(le.negate(), G::atom(0, Cmp::Gt, r(3, 1)));
        let eq = G::atom(0, Cmp::Eq, r(3, 1));
        assert_eq!(
            eq.negate(),
            G::Or(Box::new(G::atom(0, Cmp::Gt, r(3, 1))), Box::new(G::atom(0, Cmp::Lt, r(3, 1))))
        );
        assert_eq!(G::True.negate(), G::False);
        assert!(!G::False.satisfiable());
        assert!(eq.negate().size() <= 2 * eq.size());
    }

    #[test]
    fn satisfiability() {
        let g = G::and(G::atom(0, Cmp::Gt, r(3, 1)), G::atom(0, Cmp::Lt, r(3, 1)));
        assert!(!g.satisfiable());
        let g = G::and(G::atom(0, Cmp::Gt, r(3, 1)), G::atom(1, Cmp::Lt, r(1, 1)));
        assert!(g.satisfiable());
        assert!(!G::atom(0, Cmp::Lt, Rational::ZERO).satisfiable());
    }

    #[test]
    fn reset_and_advance() {
        let nu = ClockValuation::empty(2).reset(&[0].into_iter().collect()).advance(r(3, 2));
        assert_eq!(nu.get(0), Some(r(3, 2)));
        assert_eq!(nu.get(1), None);
        assert_eq!(nu.domain(), [0].into_iter().collect());
    }
}
