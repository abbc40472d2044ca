//! Event predicates: the closure of basic comparisons and type tests under
//! intersection and negation, plus a syntactic satisfiability procedure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Event, Value};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "!=")]
    Ne,
}

impl Cmp {
    pub fn eval<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Eq => a == b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
            Cmp::Ne => a != b,
        }
    }

    /// The comparator accepting exactly the values this one rejects.
    pub fn complement(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Ge,
            Cmp::Le => Cmp::Gt,
            Cmp::Eq => Cmp::Ne,
            Cmp::Ge => Cmp::Lt,
            Cmp::Gt => Cmp::Le,
            Cmp::Ne => Cmp::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Ne => "!=",
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Basic { attr: String, cmp: Cmp, value: Value },
    TypeIs(String),
    And(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
    True,
}

impl Predicate {
    pub fn basic(attr: impl Into<String>, cmp: Cmp, value: Value) -> Predicate {
        Predicate::Basic { attr: attr.into(), cmp, value }
    }

    pub fn type_is(ty: impl Into<String>) -> Predicate {
        Predicate::TypeIs(ty.into())
    }

    /// Intersection, simplifying `True` operands away.
    pub fn and(a: Predicate, b: Predicate) -> Predicate {
        match (a, b) {
            (Predicate::True, b) => b,
            (a, Predicate::True) => a,
            (a, b) => Predicate::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn negate(p: Predicate) -> Predicate {
        match p {
            Predicate::Not(inner) => *inner,
            p => Predicate::Not(Box::new(p)),
        }
    }

    /// Union, expressed through negation and intersection.
    pub fn or(a: Predicate, b: Predicate) -> Predicate {
        Predicate::negate(Predicate::And(
            Box::new(Predicate::negate(a)),
            Box::new(Predicate::negate(b)),
        ))
    }

    /// Size: basic predicates count 1, intersection sums, negation adds one.
    pub fn size(&self) -> usize {
        match self {
            Predicate::Basic { .. } | Predicate::TypeIs(_) | Predicate::True => 1,
            Predicate::And(a, b) => a.size() + b.size(),
            Predicate::Not(p) => p.size() + 1,
        }
    }

    /// `e ⊨ P`. A comparison on a missing attribute is false; strings only
    /// support `=` and `≠`; comparing a string with a number is false.
    pub fn sat(&self, e: &Event) -> bool {
        match self {
            Predicate::True => true,
            Predicate::TypeIs(t) => e.ty == *t,
            Predicate::And(a, b) => a.sat(e) && b.sat(e),
            Predicate::Not(p) => !p.sat(e),
            Predicate::Basic { attr, cmp, value } => match e.attrs.get(attr) {
                None => false,
                Some(v) => compare(v, *cmp, value),
            },
        }
    }

    /// A set of events satisfies `P` iff every member does.
    pub fn sat_all<'a>(&self, events: impl IntoIterator<Item = &'a Event>) -> bool {
        events.into_iter().all(|e| self.sat(e))
    }

    /// Rewrites every `attr cmp value` matching the given triple.
    pub fn map_basic(&self, f: &dyn Fn(&str, Cmp, &Value) -> Option<Predicate>) -> Predicate {
        match self {
            Predicate::Basic { attr, cmp, value } => {
                f(attr, *cmp, value).unwrap_or_else(|| self.clone())
            }
            Predicate::And(a, b) => {
                Predicate::And(Box::new(a.map_basic(f)), Box::new(b.map_basic(f)))
            }
            Predicate::Not(p) => Predicate::Not(Box::new(p.map_basic(f))),
            other => other.clone(),
        }
    }
}

fn compare(v: &Value, cmp: Cmp, c: &Value) -> bool {
    match (v, c) {
        (Value::Str(a), Value::Str(b)) => match cmp {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            _ => false,
        },
        (Value::Str(_), _) | (_, Value::Str(_)) => false,
        _ => {
            let a = v.as_number().expect("numeric");
            let b = c.as_number().expect("numeric");
            cmp.eval(&a, &b)
        }
    }
}

/// Writes a constant so that the query parser reads back the same variant.
pub(crate) fn fmt_constant(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Int(i) => write!(f, "{i}"),
        Value::Rat(r) if r.is_integer() => write!(f, "{}.0", r.numer()),
        Value::Rat(r) => write!(f, "{r}"),
        Value::Str(s) => write!(f, "{s:?}"),
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::True => f.write_str("TRUE"),
            Predicate::TypeIs(t) => write!(f, "TYPE = {t}"),
            Predicate::Basic { attr, cmp, value } => {
                write!(f, "{attr} {cmp} ")?;
                fmt_constant(value, f)
            }
            Predicate::And(a, b) => write!(f, "({a} AND {b})"),
            Predicate::Not(p) => write!(f, "NOT {p}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Satisfiability
// ---------------------------------------------------------------------------

/// Whether some event satisfies `p`.
pub fn satisfiable(p: &Predicate) -> bool {
    satisfiable_literals(&[(p, true)])
}

/// Whether some event satisfies every `(p, polarity)`: `p` itself when the
/// polarity is true, its complement otherwise.
///
/// Decided exactly: the conjunction is expanded lazily into disjunctive
/// normal form and each conjunct is checked per attribute over a dense
/// numeric domain plus strings.
pub fn satisfiable_literals(items: &[(&Predicate, bool)]) -> bool {
    let mut stack: Vec<(&Predicate, bool)> = items.to_vec();
    let mut lits = Vec::new();
    search(&mut stack, &mut lits)
}

#[derive(Clone, Copy)]
enum Lit<'a> {
    Type(&'a str, bool),
    Basic(&'a str, Cmp, &'a Value, bool),
}

fn search<'a>(stack: &mut Vec<(&'a Predicate, bool)>, lits: &mut Vec<Lit<'a>>) -> bool {
    while let Some((p, pol)) = stack.pop() {
        match p {
            Predicate::True => {
                if !pol {
                    return false;
                }
            }
            Predicate::Not(q) => stack.push((q, !pol)),
            Predicate::And(a, b) if pol => {
                stack.push((a, true));
                stack.push((b, true));
            }
            Predicate::And(a, b) => {
                // ¬(a ∧ b) = ¬a ∨ ¬b: branch.
                let mut left_stack = stack.clone();
                left_stack.push((a, false));
                let mut left_lits = lits.clone();
                if search(&mut left_stack, &mut left_lits) {
                    return true;
                }
                stack.push((b, false));
            }
            Predicate::TypeIs(t) => lits.push(Lit::Type(t, pol)),
            Predicate::Basic { attr, cmp, value } => lits.push(Lit::Basic(attr, *cmp, value, pol)),
        }
    }
    consistent(lits)
}

fn consistent(lits: &[Lit<'_>]) -> bool {
    let mut pos_types: BTreeSet<&str> = BTreeSet::new();
    let mut neg_types: BTreeSet<&str> = BTreeSet::new();
    let mut per_attr: BTreeMap<&str, (Vec<(Cmp, &Value)>, Vec<(Cmp, &Value)>)> = BTreeMap::new();
    for lit in lits {
        match *lit {
            Lit::Type(t, true) => {
                pos_types.insert(t);
            }
            Lit::Type(t, false) => {
                neg_types.insert(t);
            }
            Lit::Basic(a, c, v, pol) => {
                let entry = per_attr.entry(a).or_default();
                if pol {
                    entry.0.push((c, v));
                } else {
                    entry.1.push((c, v));
                }
            }
        }
    }
    if pos_types.len() > 1 || pos_types.iter().any(|t| neg_types.contains(t)) {
        return false;
    }
    per_attr.values().all(|(pos, neg)| attribute_consistent(pos, neg))
}

/// Can one attribute value satisfy all positive comparisons and none of the
/// negative ones? With no positive comparison the attribute can be absent.
fn attribute_consistent(pos: &[(Cmp, &Value)], neg: &[(Cmp, &Value)]) -> bool {
    if pos.is_empty() {
        return true;
    }
    numeric_option(pos, neg) || string_option(pos, neg)
}

fn numeric_option(pos: &[(Cmp, &Value)], neg: &[(Cmp, &Value)]) -> bool {
    let mut cons: Vec<(Cmp, Rational)> = Vec::new();
    for (c, v) in pos {
        match v.as_number() {
            Some(r) => cons.push((*c, r)),
            None => return false,
        }
    }
    for (c, v) in neg {
        // A negated comparison against a string constant always holds for a
        // numeric value.
        if let Some(r) = v.as_number() {
            cons.push((c.complement(), r));
        }
    }
    NumericBox::from_constraints(&cons).is_some()
}

fn string_option(pos: &[(Cmp, &Value)], neg: &[(Cmp, &Value)]) -> bool {
    let mut eq: Option<&str> = None;
    let mut ne: BTreeSet<&str> = BTreeSet::new();
    for (c, v) in pos {
        let s = match v.as_str() {
            Some(s) => s,
            None => return false,
        };
        match c {
            Cmp::Eq => {
                if eq.is_some_and(|e| e != s) {
                    return false;
                }
                eq = Some(s);
            }
            Cmp::Ne => {
                ne.insert(s);
            }
            _ => return false,
        }
    }
    for (c, v) in neg {
        if let Some(s) = v.as_str() {
            match c {
                Cmp::Eq => {
                    ne.insert(s);
                }
                Cmp::Ne => {
                    if eq.is_some_and(|e| e != s) {
                        return false;
                    }
                    eq = Some(s);
                }
                _ => {}
            }
        }
    }
    match eq {
        Some(e) => !ne.contains(e),
        None => true,
    }
}

/// A set of rationals described by bounds, point constraints and exclusions.
#[derive(Debug, Clone)]
pub(crate) struct NumericBox {
    pub lo: Option<(Rational, bool)>,
    pub hi: Option<(Rational, bool)>,
}

impl NumericBox {
    /// Returns `None` if the constraints are jointly unsatisfiable over ℚ.
    pub fn from_constraints(cons: &[(Cmp, Rational)]) -> Option<NumericBox> {
        let mut lo: Option<(Rational, bool)> = None; // (bound, strict)
        let mut hi: Option<(Rational, bool)> = None;
        let mut excluded: Vec<Rational> = Vec::new();
        let tighten_lo = |lo: &mut Option<(Rational, bool)>, v: Rational, strict: bool| match lo {
            Some((b, s)) if *b > v || (*b == v && *s) => {}
            _ => *lo = Some((v, strict)),
        };
        let tighten_hi = |hi: &mut Option<(Rational, bool)>, v: Rational, strict: bool| match hi {
            Some((b, s)) if *b < v || (*b == v && *s) => {}
            _ => *hi = Some((v, strict)),
        };
        for &(c, v) in cons {
            match c {
                Cmp::Lt => tighten_hi(&mut hi, v, true),
                Cmp::Le => tighten_hi(&mut hi, v, false),
                Cmp::Gt => tighten_lo(&mut lo, v, true),
                Cmp::Ge => tighten_lo(&mut lo, v, false),
                Cmp::Eq => {
                    tighten_lo(&mut lo, v, false);
                    tighten_hi(&mut hi, v, false);
                }
                Cmp::Ne => excluded.push(v),
            }
        }
        if let (Some((l, ls)), Some((h, hs))) = (lo, hi) {
            if l > h || (l == h && (ls || hs)) {
                return None;
            }
            // A single point must not be excluded; a proper interval over a
            // dense domain survives finitely many exclusions.
            if l == h && excluded.contains(&l) {
                return None;
            }
        }
        Some(NumericBox { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp(c: Cmp, v: i64) -> Predicate {
        Predicate::basic("temp", c, Value::Int(v))
    }

    #[test]
    fn basic_sat_on_sensor_events() {
        let hot = Event::new("T").with("temp", Value::Int(45));
        let warm = Event::new("T").with("temp", Value::Int(40));
        assert!(temp(Cmp::Gt, 40).sat(&hot));
        assert!(!temp(Cmp::Gt, 40).sat(&warm));
        assert!(Predicate::True.sat(&warm));
        // missing attribute
        assert!(!Predicate::basic("hum", Cmp::Lt, Value::Int(30)).sat(&hot));
        assert!(Predicate::negate(Predicate::basic("hum", Cmp::Lt, Value::Int(30))).sat(&hot));
    }

    #[test]
    fn strings_only_support_equality() {
        let e = Event::new("A").with("name", Value::Str("x".into()));
        assert!(Predicate::basic("name", Cmp::Eq, Value::Str("x".into())).sat(&e));
        assert!(!Predicate::basic("name", Cmp::Lt, Value::Str("y".into())).sat(&e));
        assert!(!Predicate::basic("name", Cmp::Eq, Value::Int(1)).sat(&e));
    }

    #[test]
    fn size_follows_structure() {
        let p = Predicate::And(Box::new(temp(Cmp::Gt, 1)), Box::new(Predicate::Not(Box::new(temp(Cmp::Lt, 3)))));
        assert_eq!(p.size(), 3);
    }

    #[test]
    fn satisfiability_cases() {
        let gt40 = temp(Cmp::Gt, 40);
        let lt25 = temp(Cmp::Lt, 25);
        assert!(!satisfiable(&Predicate::and(gt40.clone(), lt25.clone())));
        assert!(satisfiable(&Predicate::and(gt40.clone(), Predicate::negate(lt25.clone()))));
        assert!(!satisfiable_literals(&[(&gt40, true), (&gt40, false)]));
        // absent attribute satisfies both negations
        assert!(satisfiable_literals(&[(&gt40, false), (&lt25, false)]));
        let ta = Predicate::type_is("A");
        let tb = Predicate::type_is("B");
        assert!(!satisfiable(&Predicate::and(ta.clone(), tb.clone())));
        assert!(satisfiable_literals(&[(&ta, false), (&tb, false)]));
        // point excluded
        let eq = temp(Cmp::Eq, 3);
        let ne = temp(Cmp::Ne, 3);
        assert!(!satisfiable(&Predicate::and(eq, ne)));
        // dense domain: 1 < x < 2 is satisfiable
        assert!(satisfiable(&Predicate::and(temp(Cmp::Gt, 1), temp(Cmp::Lt, 2))));
        assert!(!satisfiable(&Predicate::and(temp(Cmp::Gt, 1), temp(Cmp::Lt, 1))));
        assert!(!satisfiable(&Predicate::negate(Predicate::True)));
    }

    #[test]
    fn union_via_negation() {
        let p = Predicate::or(temp(Cmp::Lt, 0), temp(Cmp::Gt, 10));
        assert!(p.sat(&Event::new("T").with("temp", Value::Int(11))));
        assert!(!p.sat(&Event::new("T").with("temp", Value::Int(5))));
    }
}
