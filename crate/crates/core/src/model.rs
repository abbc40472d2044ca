//! Events, timed streams, intervals and complex events.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// Variable names. Event types double as variables.
pub type Var = String;

/// A set of variables, as carried by transition labels and projections.
pub type VarSet = BTreeSet<Var>;

/// An interval over the non-negative rationals; `high == None` means `∞`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub low: Rational,
    pub high: Option<Rational>,
    pub low_open: bool,
    pub high_open: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval lower bound {0} is negative")]
    NegativeLow(Rational),
    #[error("interval low {low} exceeds high {high}")]
    LowAboveHigh { low: Rational, high: Rational },
}

impl Interval {
    pub fn new(
        low: Rational,
        high: Option<Rational>,
        low_open: bool,
        high_open: bool,
    ) -> Result<Interval, IntervalError> {
        if low.is_negative() {
            return Err(IntervalError::NegativeLow(low));
        }
        if let Some(h) = high {
            if low > h {
                return Err(IntervalError::LowAboveHigh { low, high: h });
            }
        }
        Ok(Interval { low, high, low_open, high_open: high_open || high.is_none() })
    }

    /// `[low, high]`.
    pub fn closed(low: Rational, high: Rational) -> Interval {
        Interval::new(low, Some(high), false, false).expect("valid closed interval")
    }

    /// `[0, c]`, written `≤ c`.
    pub fn at_most(c: Rational) -> Interval {
        Interval::closed(Rational::ZERO, c)
    }

    /// `[low, ∞)`.
    pub fn at_least(low: Rational) -> Interval {
        Interval::new(low, None, false, true).expect("valid unbounded interval")
    }

    /// `(low, ∞)`.
    pub fn greater_than(low: Rational) -> Interval {
        Interval::new(low, None, true, true).expect("valid unbounded interval")
    }

    /// `[0, ∞)`.
    pub fn unbounded() -> Interval {
        Interval::at_least(Rational::ZERO)
    }

    pub fn contains(&self, q: Rational) -> bool {
        let above = if self.low_open { q > self.low } else { q >= self.low };
        let below = match self.high {
            None => true,
            Some(h) if self.high_open => q < h,
            Some(h) => q <= h,
        };
        above && below
    }

    /// True when the interval is empty (e.g. `(2,2]`).
    pub fn is_empty(&self) -> bool {
        match self.high {
            None => false,
            Some(h) => self.low == h && (self.low_open || self.high_open),
        }
    }

    pub fn is_unbounded_from_zero(&self) -> bool {
        self.low == Rational::ZERO && !self.low_open && self.high.is_none()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.low_open { '(' } else { '[' };
        match self.high {
            None => write!(f, "{open}{},inf)", self.low),
            Some(h) => {
                let close = if self.high_open { ')' } else { ']' };
                write!(f, "{open}{},{h}{close}", self.low)
            }
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Attribute values: a closed variant. Strings only support `=` and `≠`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Rat(Rational),
    Str(String),
}

impl Value {
    /// Numeric view; integers and rationals compare on one scale.
    pub fn as_number(&self) -> Option<Rational> {
        match self {
            Value::Int(i) => Some(Rational::from_integer(*i)),
            Value::Rat(r) => Some(*r),
            Value::Str(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Rat(r) => write!(f, "{r}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default)]
    pub attrs: BTreeMap<String, Value>,
}

impl Event {
    pub fn new(ty: impl Into<String>) -> Event {
        Event { ty: ty.into(), attrs: BTreeMap::new() }
    }

    pub fn with(mut self, attr: impl Into<String>, value: Value) -> Event {
        self.attrs.insert(attr.into(), value);
        self
    }

    /// `|e|`: attributes plus one for the type tag.
    pub fn size(&self) -> usize {
        self.attrs.len() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("timestamp at position {position} ({current}) does not exceed the previous one ({previous})")]
pub struct NonIncreasingTimestamp {
    pub position: usize,
    pub previous: Rational,
    pub current: Rational,
}

/// A finite timed stream. Positions are 1-based throughout the crate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimedStream {
    items: Vec<(Event, Rational)>,
}

impl TimedStream {
    pub fn new() -> TimedStream {
        TimedStream::default()
    }

    pub fn from_items(items: Vec<(Event, Rational)>) -> Result<TimedStream, NonIncreasingTimestamp> {
        let mut s = TimedStream::new();
        for (e, t) in items {
            s.push(e, t)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, event: Event, ts: Rational) -> Result<(), NonIncreasingTimestamp> {
        if let Some((_, prev)) = self.items.last() {
            if ts <= *prev {
                return Err(NonIncreasingTimestamp {
                    position: self.items.len() + 1,
                    previous: *prev,
                    current: ts,
                });
            }
        }
        self.items.push((event, ts));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Event at 1-based position `i`.
    pub fn event(&self, i: usize) -> &Event {
        &self.items[i - 1].0
    }

    /// Timestamp at 1-based position `i`.
    pub fn ts(&self, i: usize) -> Rational {
        self.items[i - 1].1
    }

    pub fn items(&self) -> &[(Event, Rational)] {
        &self.items
    }

    /// Prefix consisting of the first `n` items.
    pub fn prefix(&self, n: usize) -> TimedStream {
        TimedStream { items: self.items[..n.min(self.items.len())].to_vec() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Event, Rational)> {
        self.items.iter()
    }
}

/// A complex event `(start, end, binding)`; variables bound to the empty set
/// are never stored, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComplexEvent {
    pub start: usize,
    pub end: usize,
    pub binding: BTreeMap<Var, BTreeSet<usize>>,
}

impl ComplexEvent {
    pub fn new(start: usize, end: usize) -> ComplexEvent {
        ComplexEvent { start, end, binding: BTreeMap::new() }
    }

    /// Single-position event bound to one variable.
    pub fn singleton(i: usize, var: &str) -> ComplexEvent {
        let mut c = ComplexEvent::new(i, i);
        c.bind(var, i);
        c
    }

    pub fn bind(&mut self, var: &str, index: usize) {
        self.binding.entry(var.to_string()).or_default().insert(index);
    }

    pub fn get(&self, var: &str) -> Option<&BTreeSet<usize>> {
        self.binding.get(var)
    }

    /// All indices bound to any variable.
    pub fn all_indices(&self) -> BTreeSet<usize> {
        self.binding.values().flatten().copied().collect()
    }

    pub fn union(&self, other: &ComplexEvent) -> ComplexEvent {
        let mut binding = self.binding.clone();
        for (x, set) in &other.binding {
            binding.entry(x.clone()).or_default().extend(set.iter().copied());
        }
        ComplexEvent {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            binding,
        }
    }

    pub fn project(&self, vars: &VarSet) -> ComplexEvent {
        ComplexEvent {
            start: self.start,
            end: self.end,
            binding: self
                .binding
                .iter()
                .filter(|(x, _)| vars.contains(*x))
                .map(|(x, s)| (x.clone(), s.clone()))
                .collect(),
        }
    }

    /// Indexed view: position ↦ variables bound at that position.
    pub fn indexed(&self) -> BTreeMap<usize, VarSet> {
        let mut out: BTreeMap<usize, VarSet> = BTreeMap::new();
        for (x, set) in &self.binding {
            for &i in set {
                out.entry(i).or_default().insert(x.clone());
            }
        }
        out
    }

    pub fn from_indexed(start: usize, end: usize, indexed: &BTreeMap<usize, VarSet>) -> ComplexEvent {
        let mut c = ComplexEvent::new(start, end);
        for (&i, vars) in indexed {
            for x in vars {
                c.bind(x, i);
            }
        }
        c
    }

    /// Output size: one plus the number of (variable, index) pairs.
    pub fn size(&self) -> usize {
        1 + self.binding.values().map(BTreeSet::len).sum::<usize>()
    }
}

impl fmt::Debug for ComplexEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{{", self.start, self.end)?;
        for (k, (x, set)) in self.binding.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}↦{set:?}")?;
        }
        write!(f, "}})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ce(start: usize, end: usize, binds: &[(&str, &[usize])]) -> ComplexEvent {
        let mut c = ComplexEvent::new(start, end);
        for (x, idx) in binds {
            for &i in *idx {
                c.bind(x, i);
            }
        }
        c
    }

    #[test]
    fn union_takes_hull_and_merges_sets() {
        let a = ce(5, 9, &[("X", &[5])]);
        let b = ce(2, 9, &[("Y", &[9])]);
        assert_eq!(a.union(&b), ce(2, 9, &[("X", &[5]), ("Y", &[9])]));
        let c = ce(1, 3, &[("X", &[2])]);
        let d = ce(4, 6, &[("X", &[5])]);
        assert_eq!(c.union(&d), ce(1, 6, &[("X", &[2, 5])]));
        assert_eq!(a.union(&a), a);
    }

    #[test]
    fn projection_keeps_time() {
        let c = ce(5, 9, &[("X", &[5]), ("Y", &[9]), ("T", &[6])]);
        let l: VarSet = ["X", "Y"].iter().map(|s| s.to_string()).collect();
        assert_eq!(c.project(&l), ce(5, 9, &[("X", &[5]), ("Y", &[9])]));
        assert_eq!(c.project(&VarSet::new()), ce(5, 9, &[]));
    }

    #[test]
    fn indexed_view_round_trips() {
        let c = ce(2, 8, &[("X", &[2, 4]), ("Y", &[4, 8])]);
        assert_eq!(ComplexEvent::from_indexed(2, 8, &c.indexed()), c);
    }

    #[test]
    fn interval_membership() {
        let i = Interval::new(Rational::from(2), None, true, true).unwrap();
        assert!(!i.contains(Rational::from(2)));
        assert!(i.contains(Rational::new(5, 2)));
        assert!(Interval::at_most(Rational::ONE).contains(Rational::ZERO));
        assert!(Interval::new(Rational::from(3), Some(Rational::from(2)), false, false).is_err());
    }

    #[test]
    fn stream_rejects_equal_timestamps() {
        let mut s = TimedStream::new();
        s.push(Event::new("A"), Rational::ONE).unwrap();
        let err = s.push(Event::new("B"), Rational::ONE).unwrap_err();
        assert_eq!(err.position, 2);
    }
}
