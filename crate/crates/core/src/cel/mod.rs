//! Timed CEL: abstract syntax, concrete syntax, fragment classification and
//! the reference semantics.

mod classify;
mod oracle;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Interval, Var, VarSet};
use crate::predicate::Predicate;

pub use classify::{classify, Classification, Fragment};
pub(crate) use classify::is_simple as is_simple_formula;
pub use oracle::{eval_cel_oracle, eval_cel_oracle_with, OracleConfig, OracleError, DEFAULT_STREAM_CAP};
pub use parser::{parse_query, ParseError, ParseErrorKind};

/// A timed CEL formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CelFormula {
    EventType(String),
    As(Box<CelFormula>, Var),
    Filter(Box<CelFormula>, Var, Predicate),
    Or(Box<CelFormula>, Box<CelFormula>),
    And(Box<CelFormula>, Box<CelFormula>),
    Seq(Box<CelFormula>, Box<CelFormula>),
    ContigSeq(Box<CelFormula>, Box<CelFormula>),
    Plus(Box<CelFormula>),
    ContigPlus(Box<CelFormula>),
    Project(VarSet, Box<CelFormula>),
    Within(Box<CelFormula>, Interval),
    TimedSeq(Box<CelFormula>, Interval, Box<CelFormula>),
    TimedContigSeq(Box<CelFormula>, Interval, Box<CelFormula>),
    TimedIter(Box<CelFormula>, Interval),
    TimedContigIter(Box<CelFormula>, Interval),
}

use CelFormula as F;

impl CelFormula {
    pub fn event(ty: &str) -> CelFormula {
        F::EventType(ty.to_string())
    }

    pub fn as_var(self, x: &str) -> CelFormula {
        F::As(Box::new(self), x.to_string())
    }

    pub fn filter(self, x: &str, p: Predicate) -> CelFormula {
        F::Filter(Box::new(self), x.to_string(), p)
    }

    pub fn or(self, other: CelFormula) -> CelFormula {
        F::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: CelFormula) -> CelFormula {
        F::And(Box::new(self), Box::new(other))
    }

    pub fn seq(self, other: CelFormula) -> CelFormula {
        F::Seq(Box::new(self), Box::new(other))
    }

    pub fn contig_seq(self, other: CelFormula) -> CelFormula {
        F::ContigSeq(Box::new(self), Box::new(other))
    }

    pub fn plus(self) -> CelFormula {
        F::Plus(Box::new(self))
    }

    pub fn contig_plus(self) -> CelFormula {
        F::ContigPlus(Box::new(self))
    }

    pub fn project<I: IntoIterator<Item = S>, S: Into<String>>(self, vars: I) -> CelFormula {
        F::Project(vars.into_iter().map(Into::into).collect(), Box::new(self))
    }

    pub fn within(self, i: Interval) -> CelFormula {
        F::Within(Box::new(self), i)
    }

    pub fn timed_seq(self, i: Interval, other: CelFormula) -> CelFormula {
        F::TimedSeq(Box::new(self), i, Box::new(other))
    }

    pub fn timed_contig_seq(self, i: Interval, other: CelFormula) -> CelFormula {
        F::TimedContigSeq(Box::new(self), i, Box::new(other))
    }

    pub fn timed_iter(self, i: Interval) -> CelFormula {
        F::TimedIter(Box::new(self), i)
    }

    pub fn timed_contig_iter(self, i: Interval) -> CelFormula {
        F::TimedContigIter(Box::new(self), i)
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&CelFormula> {
        match self {
            F::EventType(_) => vec![],
            F::As(p, _)
            | F::Filter(p, _, _)
            | F::Plus(p)
            | F::ContigPlus(p)
            | F::Project(_, p)
            | F::Within(p, _)
            | F::TimedIter(p, _)
            | F::TimedContigIter(p, _) => vec![p],
            F::Or(a, b)
            | F::And(a, b)
            | F::Seq(a, b)
            | F::ContigSeq(a, b)
            | F::TimedSeq(a, _, b)
            | F::TimedContigSeq(a, _, b) => vec![a, b],
        }
    }

    /// Nesting depth; an event type has depth 0.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Number of operator nodes, leaves included.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Event types mentioned by the formula.
    pub fn event_types(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let F::EventType(r) = f {
                out.insert(r.clone());
            }
        });
        out
    }

    /// Variables that can appear in outputs (event types and `AS` targets).
    pub fn variables(&self) -> VarSet {
        let mut out = VarSet::new();
        self.walk(&mut |f| match f {
            F::EventType(r) => {
                out.insert(r.clone());
            }
            F::As(_, x) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut dyn FnMut(&CelFormula)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Short operator name, used in diagnostics and coverage reports.
    pub fn operator_name(&self) -> &'static str {
        match self {
            F::EventType(_) => "event-type",
            F::As(..) => "as",
            F::Filter(..) => "filter",
            F::Or(..) => "or",
            F::And(..) => "and",
            F::Seq(..) => "seq",
            F::ContigSeq(..) => "contig-seq",
            F::Plus(..) => "plus",
            F::ContigPlus(..) => "contig-plus",
            F::Project(..) => "project",
            F::Within(..) => "within",
            F::TimedSeq(..) => "timed-seq",
            F::TimedContigSeq(..) => "timed-contig-seq",
            F::TimedIter(..) => "timed-iter",
            F::TimedContigIter(..) => "timed-contig-iter",
        }
    }

    /// Whether the formula uses any time operator.
    pub fn has_time_operator(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| {
            if matches!(
                f,
                F::Within(..)
                    | F::TimedSeq(..)
                    | F::TimedContigSeq(..)
                    | F::TimedIter(..)
                    | F::TimedContigIter(..)
            ) {
                found = true;
            }
        });
        found
    }

    /// Applies `f` to every predicate in `FILTER` clauses.
    pub fn map_predicates(&self, f: &dyn Fn(&Predicate) -> Predicate) -> CelFormula {
        let m = |x: &CelFormula| Box::new(x.map_predicates(f));
        match self {
            F::EventType(r) => F::EventType(r.clone()),
            F::As(p, x) => F::As(m(p), x.clone()),
            F::Filter(p, x, pred) => F::Filter(m(p), x.clone(), f(pred)),
            F::Or(a, b) => F::Or(m(a), m(b)),
            F::And(a, b) => F::And(m(a), m(b)),
            F::Seq(a, b) => F::Seq(m(a), m(b)),
            F::ContigSeq(a, b) => F::ContigSeq(m(a), m(b)),
            F::Plus(p) => F::Plus(m(p)),
            F::ContigPlus(p) => F::ContigPlus(m(p)),
            F::Project(l, p) => F::Project(l.clone(), m(p)),
            F::Within(p, i) => F::Within(m(p), i.clone()),
            F::TimedSeq(a, i, b) => F::TimedSeq(m(a), i.clone(), m(b)),
            F::TimedContigSeq(a, i, b) => F::TimedContigSeq(m(a), i.clone(), m(b)),
            F::TimedIter(p, i) => F::TimedIter(m(p), i.clone()),
            F::TimedContigIter(p, i) => F::TimedContigIter(m(p), i.clone()),
        }
    }
}

/// Fully parenthesized concrete syntax; `parse_query` reads it back to the
/// same tree.
impl fmt::Display for CelFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F::EventType(r) => write!(f, "{r}"),
            F::As(p, x) => write!(f, "({p} AS {x})"),
            F::Filter(p, x, pred) => write!(f, "({p} FILTER {x}[{pred}])"),
            F::Or(a, b) => write!(f, "({a} OR {b})"),
            F::And(a, b) => write!(f, "({a} AND {b})"),
            F::Seq(a, b) => write!(f, "({a} ; {b})"),
            F::ContigSeq(a, b) => write!(f, "({a} : {b})"),
            F::Plus(p) => write!(f, "({p} +)"),
            F::ContigPlus(p) => write!(f, "({p} (+))"),
            F::Project(l, p) => {
                write!(f, "PROJECT[")?;
                for (k, x) in l.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]({p})")
            }
            F::Within(p, i) => write!(f, "({p} WITHIN {i})"),
            F::TimedSeq(a, i, b) => write!(f, "({a} ;{i} {b})"),
            F::TimedContigSeq(a, i, b) => write!(f, "({a} :{i} {b})"),
            F::TimedIter(p, i) => write!(f, "({p} +{i})"),
            F::TimedContigIter(p, i) => write!(f, "({p} (+){i})"),
        }
    }
}
