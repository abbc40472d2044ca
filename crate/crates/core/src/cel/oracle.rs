//! Reference semantics of timed CEL by structural recursion.
//!
//! Exponential by nature; intended as the ground truth for tests and for the
//! differential runner, never for production streams.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::CelFormula;
use crate::model::{ComplexEvent, Interval, TimedStream};

pub const DEFAULT_STREAM_CAP: usize = 14;

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Longest stream the oracle accepts.
    pub stream_cap: usize,
    /// Largest intermediate result set before the oracle gives up.
    pub max_results: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { stream_cap: DEFAULT_STREAM_CAP, max_results: 250_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("stream of length {len} exceeds the oracle cap of {cap}")]
    StreamTooLong { len: usize, cap: usize },
    #[error("intermediate result exceeds {limit} complex events")]
    TooManyResults { limit: usize },
}

type Set = BTreeSet<ComplexEvent>;

/// `⟦φ⟧(S)` with the default configuration.
pub fn eval_cel_oracle(phi: &CelFormula, s: &TimedStream) -> Result<Set, OracleError> {
    eval_cel_oracle_with(phi, s, &OracleConfig::default())
}

pub fn eval_cel_oracle_with(
    phi: &CelFormula,
    s: &TimedStream,
    cfg: &OracleConfig,
) -> Result<Set, OracleError> {
    if s.len() > cfg.stream_cap {
        return Err(OracleError::StreamTooLong { len: s.len(), cap: cfg.stream_cap });
    }
    Eval { s, limit: cfg.max_results }.eval(phi)
}

struct Eval<'a> {
    s: &'a TimedStream,
    limit: usize,
}

/// How two operands of a sequencing operator must be placed.
#[derive(Clone, Copy)]
enum Gap<'i> {
    Any,
    Contiguous,
    Timed(&'i Interval),
    TimedContiguous(&'i Interval),
}

impl Eval<'_> {
    fn check(&self, set: Set) -> Result<Set, OracleError> {
        if set.len() > self.limit {
            Err(OracleError::TooManyResults { limit: self.limit })
        } else {
            Ok(set)
        }
    }

    fn eval(&self, phi: &CelFormula) -> Result<Set, OracleError> {
        use CelFormula as F;
        let out = match phi {
            F::EventType(r) => (1..=self.s.len())
                .filter(|&i| self.s.event(i).ty == *r)
                .map(|i| ComplexEvent::singleton(i, r))
                .collect(),
            F::As(p, x) => self
                .eval(p)?
                .into_iter()
                .map(|mut c| {
                    let all = c.all_indices();
                    if !all.is_empty() {
                        c.binding.insert(x.clone(), all);
                    } else {
                        c.binding.remove(x);
                    }
                    c
                })
                .collect(),
            F::Filter(p, x, pred) => self
                .eval(p)?
                .into_iter()
                .filter(|c| match c.get(x) {
                    None => true,
                    Some(set) => set.iter().all(|&i| pred.sat(self.s.event(i))),
                })
                .collect(),
            F::Or(a, b) => {
                let mut l = self.eval(a)?;
                l.extend(self.eval(b)?);
                l
            }
            F::And(a, b) => {
                let l = self.eval(a)?;
                let r = self.eval(b)?;
                l.intersection(&r).cloned().collect()
            }
            F::Seq(a, b) => self.join(&self.eval(a)?, &self.eval(b)?, Gap::Any)?,
            F::ContigSeq(a, b) => self.join(&self.eval(a)?, &self.eval(b)?, Gap::Contiguous)?,
            F::TimedSeq(a, i, b) => self.join(&self.eval(a)?, &self.eval(b)?, Gap::Timed(i))?,
            F::TimedContigSeq(a, i, b) => {
                self.join(&self.eval(a)?, &self.eval(b)?, Gap::TimedContiguous(i))?
            }
            F::Plus(p) => self.iterate(&self.eval(p)?, Gap::Any)?,
            F::ContigPlus(p) => self.iterate(&self.eval(p)?, Gap::Contiguous)?,
            F::TimedIter(p, i) => self.iterate(&self.eval(p)?, Gap::Timed(i))?,
            F::TimedContigIter(p, i) => self.iterate(&self.eval(p)?, Gap::TimedContiguous(i))?,
            F::Project(l, p) => self.eval(p)?.into_iter().map(|c| c.project(l)).collect(),
            F::Within(p, i) => self
                .eval(p)?
                .into_iter()
                .filter(|c| i.contains(self.s.ts(c.end) - self.s.ts(c.start)))
                .collect(),
        };
        self.check(out)
    }

    fn fits(&self, c1: &ComplexEvent, c2: &ComplexEvent, gap: Gap<'_>) -> bool {
        let gap_ok = |i: &Interval| i.contains(self.s.ts(c2.start) - self.s.ts(c1.end));
        match gap {
            Gap::Any => c1.end < c2.start,
            Gap::Contiguous => c1.end + 1 == c2.start,
            Gap::Timed(i) => c1.end < c2.start && gap_ok(i),
            Gap::TimedContiguous(i) => c1.end + 1 == c2.start && gap_ok(i),
        }
    }

    /// `{C1 ∪ C2 | C1 ∈ left, C2 ∈ right, placement holds}`.
    fn join(&self, left: &Set, right: &Set, gap: Gap<'_>) -> Result<Set, OracleError> {
        let mut by_start: BTreeMap<usize, Vec<&ComplexEvent>> = BTreeMap::new();
        for c in right {
            by_start.entry(c.start).or_default().push(c);
        }
        let mut out = Set::new();
        for c1 in left {
            for (_, cs) in by_start.range(c1.end + 1..) {
                for c2 in cs {
                    if self.fits(c1, c2, gap) {
                        out.insert(c1.union(c2));
                    }
                }
                if matches!(gap, Gap::Contiguous | Gap::TimedContiguous(_)) {
                    break;
                }
            }
            if out.len() > self.limit {
                return Err(OracleError::TooManyResults { limit: self.limit });
            }
        }
        Ok(out)
    }

    /// Least fixed point of `R = base ∪ join(base, R)`, computed semi-naively.
    fn iterate(&self, base: &Set, gap: Gap<'_>) -> Result<Set, OracleError> {
        let mut all = base.clone();
        let mut delta = base.clone();
        while !delta.is_empty() {
            let produced = self.join(base, &delta, gap)?;
            delta = produced.into_iter().filter(|c| !all.contains(c)).collect();
            all.extend(delta.iter().cloned());
            if all.len() > self.limit {
                return Err(OracleError::TooManyResults { limit: self.limit });
            }
        }
        Ok(all)
    }
}
